//! HTTP chat-completion backend.
//!
//! [`HttpBackend`] speaks the ubiquitous chat-completion wire format: POST a
//! JSON body with `model`, `messages`, and decoding parameters, read
//! `choices[0].message.content` back. Transport hiccups and server errors
//! are retried with a short backoff; timeouts and client errors are not —
//! the former already cost the full per-request budget, the latter will not
//! heal on their own. A counting gate caps concurrent in-flight requests so
//! batch runs cannot stampede a single-GPU endpoint.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::prompt::{PromptBundle, Role};

use super::{Backend, BackendError, DecodingParams};

/// Sleep before the second and third attempts.
const RETRY_BACKOFF_MS: [u64; 2] = [250, 1000];

/// Counting gate: at most `capacity` holders at a time.
struct Gate {
    permits: Mutex<usize>,
    freed: Condvar,
}

impl Gate {
    fn new(capacity: usize) -> Self {
        Self { permits: Mutex::new(capacity.max(1)), freed: Condvar::new() }
    }

    fn acquire(&self) -> GatePermit<'_> {
        let mut permits = self.permits.lock().expect("gate lock");
        while *permits == 0 {
            permits = self.freed.wait(permits).expect("gate lock");
        }
        *permits -= 1;
        GatePermit { gate: self }
    }
}

struct GatePermit<'a> {
    gate: &'a Gate,
}

impl Drop for GatePermit<'_> {
    fn drop(&mut self) {
        let mut permits = self.gate.permits.lock().expect("gate lock");
        *permits += 1;
        self.gate.freed.notify_one();
    }
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: Role,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<WireMessage<'a>>,
    temperature: f64,
    max_tokens: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    stop: Option<&'a [String]>,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: Option<String>,
}

/// Blocking chat-completion client.
pub struct HttpBackend {
    url: String,
    model: String,
    timeout_s: u64,
    client: reqwest::blocking::Client,
    gate: Gate,
}

impl HttpBackend {
    pub fn new(
        url: String,
        model: String,
        timeout_s: u64,
        max_in_flight: usize,
    ) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(timeout_s.max(1)))
            .build()
            .map_err(|e| BackendError::Unavailable(format!("cannot build http client: {e}")))?;
        Ok(Self { url, model, timeout_s, client, gate: Gate::new(max_in_flight) })
    }

    fn parse_completion(&self, body: &str) -> Result<String, BackendError> {
        let parsed: ChatResponse = serde_json::from_str(body)
            .map_err(|e| BackendError::MalformedResponse(format!("not a chat completion: {e}")))?;
        let choice = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| BackendError::MalformedResponse("response carries no choices".into()))?;
        let content = choice.message.content.unwrap_or_default();
        if content.trim().is_empty() {
            return Err(BackendError::EmptyCompletion);
        }
        Ok(content)
    }
}

impl Backend for HttpBackend {
    fn complete(
        &self,
        prompt: &PromptBundle,
        params: &DecodingParams,
    ) -> Result<String, BackendError> {
        let _permit = self.gate.acquire();
        let messages: Vec<WireMessage> = prompt
            .messages
            .iter()
            .map(|m| WireMessage { role: m.role, content: &m.content })
            .collect();
        let body = ChatRequest {
            model: &self.model,
            messages,
            temperature: params.temperature,
            max_tokens: params.max_tokens,
            stop: if params.stop.is_empty() { None } else { Some(&params.stop) },
        };
        let mut last_error = String::new();
        for attempt in 0..=RETRY_BACKOFF_MS.len() {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(RETRY_BACKOFF_MS[attempt - 1]));
            }
            let response = match self.client.post(&self.url).json(&body).send() {
                Err(e) if e.is_timeout() => return Err(BackendError::Timeout(self.timeout_s)),
                Err(e) => {
                    last_error = format!("transport error: {e}");
                    continue;
                }
                Ok(response) => response,
            };
            let status = response.status();
            if status.is_server_error() {
                last_error = format!("server error: http {}", status.as_u16());
                continue;
            }
            if !status.is_success() {
                return Err(BackendError::Unavailable(format!("http {}", status.as_u16())));
            }
            let text = match response.text() {
                Err(e) if e.is_timeout() => return Err(BackendError::Timeout(self.timeout_s)),
                Err(e) => {
                    return Err(BackendError::MalformedResponse(format!("unreadable body: {e}")))
                }
                Ok(text) => text,
            };
            return self.parse_completion(&text);
        }
        Err(BackendError::Unavailable(format!(
            "{last_error} (after {} attempts)",
            RETRY_BACKOFF_MS.len() + 1
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::PromptMessage;
    use crate::prompt::PromptPurpose;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::thread::JoinHandle;

    fn prompt() -> PromptBundle {
        PromptBundle {
            purpose: PromptPurpose::Classify,
            messages: vec![
                PromptMessage { role: Role::System, content: "You are a network assistant.".into() },
                PromptMessage { role: Role::User, content: "Intent: shut down the uplink".into() },
            ],
        }
    }

    fn ok_response(content: &str) -> String {
        let body = serde_json::json!({
            "choices": [{"message": {"role": "assistant", "content": content}}]
        })
        .to_string();
        http_response("200 OK", &body)
    }

    fn http_response(status: &str, body: &str) -> String {
        format!(
            "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        )
    }

    /// Serve one canned response per expected request on a loopback port;
    /// returns the endpoint URL and a handle yielding the request bodies.
    fn serve(responses: Vec<String>) -> (String, JoinHandle<Vec<String>>) {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind loopback");
        let addr = listener.local_addr().expect("local addr");
        let handle = std::thread::spawn(move || {
            let mut bodies = Vec::new();
            for response in responses {
                let (socket, _) = listener.accept().expect("accept");
                let mut reader = BufReader::new(socket);
                let mut content_length = 0usize;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).expect("read header");
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        content_length = v.trim().parse().expect("content length");
                    }
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                }
                let mut body = vec![0u8; content_length];
                reader.read_exact(&mut body).expect("read body");
                bodies.push(String::from_utf8(body).expect("utf8 body"));
                let mut socket = reader.into_inner();
                socket.write_all(response.as_bytes()).expect("write response");
            }
            bodies
        });
        (format!("http://{addr}/v1/chat/completions"), handle)
    }

    fn backend(url: String) -> HttpBackend {
        HttpBackend::new(url, "test-model".into(), 5, 1).unwrap()
    }

    #[test]
    fn sends_the_chat_body_and_returns_the_content() {
        let (url, handle) = serve(vec![ok_response("CP\nThe intent edits an interface.")]);
        let answer = backend(url).complete(&prompt(), &DecodingParams::default()).unwrap();
        assert_eq!(answer, "CP\nThe intent edits an interface.");
        let bodies = handle.join().unwrap();
        let sent: serde_json::Value = serde_json::from_str(&bodies[0]).unwrap();
        assert_eq!(sent["model"], "test-model");
        assert_eq!(sent["temperature"], 0.0);
        assert_eq!(sent["messages"][0]["role"], "system");
        assert_eq!(sent["messages"][1]["content"], "Intent: shut down the uplink");
        assert!(sent.get("stop").is_none());
    }

    #[test]
    fn retries_server_errors_until_one_succeeds() {
        let (url, handle) = serve(vec![
            http_response("500 Internal Server Error", "{}"),
            ok_response("recovered"),
        ]);
        let answer = backend(url).complete(&prompt(), &DecodingParams::default()).unwrap();
        assert_eq!(answer, "recovered");
        assert_eq!(handle.join().unwrap().len(), 2);
    }

    #[test]
    fn client_errors_fail_without_retry() {
        let (url, handle) = serve(vec![http_response("400 Bad Request", "{}")]);
        let err = backend(url).complete(&prompt(), &DecodingParams::default()).unwrap_err();
        assert!(matches!(err, BackendError::Unavailable(ref m) if m.contains("400")));
        assert_eq!(handle.join().unwrap().len(), 1);
    }

    #[test]
    fn persistent_transport_failure_is_unavailable() {
        // Bind then drop so the port is known-dead.
        let url = {
            let listener = TcpListener::bind("127.0.0.1:0").unwrap();
            format!("http://{}/v1/chat/completions", listener.local_addr().unwrap())
        };
        let err = backend(url).complete(&prompt(), &DecodingParams::default()).unwrap_err();
        assert!(matches!(err, BackendError::Unavailable(ref m) if m.contains("after 3 attempts")));
    }

    #[test]
    fn non_json_body_is_malformed() {
        let (url, _handle) = serve(vec![http_response("200 OK", "not json")]);
        let err = backend(url).complete(&prompt(), &DecodingParams::default()).unwrap_err();
        assert!(matches!(err, BackendError::MalformedResponse(_)));
    }

    #[test]
    fn blank_content_is_an_empty_completion() {
        let (url, _handle) = serve(vec![ok_response("   ")]);
        let err = backend(url).complete(&prompt(), &DecodingParams::default()).unwrap_err();
        assert!(matches!(err, BackendError::EmptyCompletion));
    }

    #[test]
    fn stop_sequences_are_forwarded_when_set() {
        let (url, handle) = serve(vec![ok_response("ok")]);
        let params = DecodingParams { stop: vec!["~~~end".into()], ..DecodingParams::default() };
        backend(url).complete(&prompt(), &params).unwrap();
        let sent: serde_json::Value =
            serde_json::from_str(&handle.join().unwrap()[0]).unwrap();
        assert_eq!(sent["stop"][0], "~~~end");
    }
}
