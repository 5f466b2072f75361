use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use wordassoc::generation::{
    generate_dataset, BackendError, CompletionBackend, CompletionRequest, GenerationConfig, HttpBackend, RunOptions,
    RunPaths,
};
use wordassoc::model::Rank;

struct Captured {
    auth: Option<String>,
    body: serde_json::Value,
}

/// Serves the canned `(status, body)` replies in order, one per connection,
/// then repeats the last one.
fn mock_server(replies: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<Captured>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    std::thread::spawn(move || {
        for (i, stream) in listener.incoming().enumerate() {
            let Ok(mut stream) = stream else { break };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut content_length = 0usize;
            let mut auth = None;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                    break;
                }
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    content_length = v.trim().parse().unwrap();
                }
                if lower.starts_with("authorization:") {
                    auth = Some(line["authorization:".len()..].trim().to_string());
                }
            }
            let mut body = vec![0u8; content_length];
            reader.read_exact(&mut body).unwrap();
            log.lock().unwrap().push(Captured { auth, body: serde_json::from_slice(&body).unwrap() });
            let (status, text) = &replies[i.min(replies.len() - 1)];
            let response = format!(
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{text}",
                text.len()
            );
            stream.write_all(response.as_bytes()).unwrap();
        }
    });
    (format!("http://{addr}/v1"), seen)
}

fn chat_reply(content: &str) -> String {
    serde_json::json!({ "choices": [{ "message": { "role": "assistant", "content": content } }] }).to_string()
}

fn request(cue: &str) -> CompletionRequest<'_> {
    CompletionRequest {
        model: "tiny",
        system_prompt: Some("be brief"),
        prompt: "words for beach",
        temperature: 0.3,
        max_tokens: 20,
        cue,
        repetition: 1,
        attempt: 0,
    }
}

#[test]
fn success_sends_openai_shaped_request() {
    let (url, seen) = mock_server(vec![(200, chat_reply("1. sand\n2. sea\n3. sun"))]);
    let backend = HttpBackend::new(&url, Some("secret".into()), Duration::from_secs(5)).unwrap();
    let text = backend.complete(&request("beach")).unwrap();
    assert_eq!(text, "1. sand\n2. sea\n3. sun");

    let seen = seen.lock().unwrap();
    let body = &seen[0].body;
    assert_eq!(seen[0].auth.as_deref(), Some("Bearer secret"));
    assert_eq!(body["model"], "tiny");
    assert_eq!(body["temperature"], 0.3);
    assert_eq!(body["max_tokens"], 20);
    assert_eq!(body["messages"][0]["role"], "system");
    assert_eq!(body["messages"][1]["content"], "words for beach");
    assert!(body.get("top_p").is_none());
}

#[test]
fn status_codes_map_to_error_kinds() {
    let (url, _) = mock_server(vec![(401, "{}".into())]);
    let backend = HttpBackend::new(&url, None, Duration::from_secs(5)).unwrap();
    assert!(matches!(backend.complete(&request("beach")), Err(BackendError::Auth(_))));

    let (url, _) = mock_server(vec![(503, "{}".into())]);
    let backend = HttpBackend::new(&url, None, Duration::from_secs(5)).unwrap();
    assert!(matches!(backend.complete(&request("beach")), Err(BackendError::Transient(_))));

    let (url, _) = mock_server(vec![(400, "{\"error\":\"bad model\"}".into())]);
    let backend = HttpBackend::new(&url, None, Duration::from_secs(5)).unwrap();
    assert!(matches!(backend.complete(&request("beach")), Err(BackendError::Fatal(_))));
}

#[test]
fn generation_retries_server_errors_and_parse_failures() {
    let (url, seen) = mock_server(vec![
        (500, "{}".into()),
        (200, chat_reply("Sure! I think of the seaside.")),
        (200, chat_reply("Sand, Ocean, Towel.")),
    ]);
    let backend = HttpBackend::new(&url, None, Duration::from_secs(5)).unwrap();
    let config = GenerationConfig {
        endpoint_url: Some(url.clone()),
        model_name: "tiny".into(),
        repetitions: 1,
        concurrency_limit: 1,
        retry_backoff_ms: 1,
        ..Default::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let paths = RunPaths::for_output(&dir.path().join("tiny.tsv"));
    let run = generate_dataset(&config, &["beach"], &backend, &paths, &RunOptions::default()).unwrap();
    let ds = run.dataset.unwrap();
    let r1: Vec<&str> = ds.select("beach", Rank::R1).iter().map(|i| i.response.as_str()).collect();
    assert_eq!(r1, vec!["sand"]);
    assert_eq!(ds.select("beach", Rank::R3)[0].response, "towel");
    assert_eq!(run.report.retries, 2);
    assert_eq!(run.report.parse_failures, 1);
    assert_eq!(run.report.transient_errors, 1);
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn auth_failure_aborts_generation() {
    let (url, _) = mock_server(vec![(403, "{}".into())]);
    let backend = HttpBackend::new(&url, Some("wrong".into()), Duration::from_secs(5)).unwrap();
    let config = GenerationConfig { model_name: "tiny".into(), repetitions: 3, retry_backoff_ms: 0, ..Default::default() };
    let dir = tempfile::tempdir().unwrap();
    let paths = RunPaths::for_output(&dir.path().join("tiny.tsv"));
    assert!(generate_dataset(&config, &["beach"], &backend, &paths, &RunOptions::default()).is_err());
    assert!(!paths.dataset.exists());
}
