//! HTTP endpoint speaking the OpenAI chat-completions wire format, which
//! most self-hosted VideoLLM servers also expose.

use std::time::Duration;

use base64::Engine;
use serde_json::{json, Value};

use super::endpoint::{ChatEndpoint, EndpointError};
use super::request::{ChatRequest, ContentPart};

pub struct HttpEndpoint {
    base_url: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpEndpoint {
    /// `base_url` is the API root (e.g. `http://localhost:8000/v1`); the
    /// endpoint posts to `{base_url}/chat/completions`.
    pub fn new(base_url: impl Into<String>, api_key: Option<String>) -> Self {
        Self::with_timeout(base_url, api_key, Duration::from_secs(120))
    }

    pub fn with_timeout(base_url: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Self {
        let mut base_url = base_url.into();
        while base_url.ends_with('/') {
            base_url.pop();
        }
        let agent = ureq::AgentBuilder::new().timeout(timeout).build();
        HttpEndpoint { base_url, api_key, agent }
    }

    fn encode_part(part: &ContentPart) -> Result<Value, EndpointError> {
        match part {
            ContentPart::Text(t) => Ok(json!({"type": "text", "text": t})),
            ContentPart::ImageUrl(u) => Ok(json!({"type": "image_url", "image_url": {"url": u}})),
            ContentPart::ImagePath(p) => {
                let bytes = std::fs::read(p).map_err(|e| {
                    EndpointError::Fatal(format!("cannot read image {}: {e}", p.display()))
                })?;
                let mime = match p.extension().and_then(|e| e.to_str()) {
                    Some("png") => "image/png",
                    Some("webp") => "image/webp",
                    _ => "image/jpeg",
                };
                let data = base64::engine::general_purpose::STANDARD.encode(bytes);
                Ok(json!({"type": "image_url", "image_url": {"url": format!("data:{mime};base64,{data}")}}))
            }
        }
    }

    fn build_body(&self, request: &ChatRequest) -> Result<Value, EndpointError> {
        let mut messages = Vec::new();
        if let Some(system) = &request.system {
            messages.push(json!({"role": "system", "content": system}));
        }
        let text_only = request.user_parts.iter().all(|p| matches!(p, ContentPart::Text(_)));
        let content = if text_only {
            Value::String(request.text_content())
        } else {
            let parts: Result<Vec<Value>, EndpointError> =
                request.user_parts.iter().map(Self::encode_part).collect();
            Value::Array(parts?)
        };
        messages.push(json!({"role": "user", "content": content}));

        let mut body = json!({
            "model": request.model_id,
            "messages": messages,
            "temperature": request.temperature,
        });
        if let Some(max_tokens) = request.max_tokens {
            body["max_tokens"] = json!(max_tokens);
        }
        Ok(body)
    }
}

fn classify_status(code: u16, body: String) -> EndpointError {
    match code {
        401 | 403 => EndpointError::Auth(format!("HTTP {code}: {body}")),
        408 | 429 => EndpointError::Transient(format!("HTTP {code}: {body}")),
        c if c >= 500 => EndpointError::Transient(format!("HTTP {c}: {body}")),
        c => EndpointError::Fatal(format!("HTTP {c}: {body}")),
    }
}

impl ChatEndpoint for HttpEndpoint {
    fn send(&self, request: &ChatRequest) -> Result<String, EndpointError> {
        let body = self.build_body(request)?;
        let url = format!("{}/chat/completions", self.base_url);
        let mut call = self.agent.post(&url).set("content-type", "application/json");
        if let Some(key) = &self.api_key {
            call = call.set("authorization", &format!("Bearer {key}"));
        }

        let response = match call.send_string(&body.to_string()) {
            Ok(r) => r,
            Err(ureq::Error::Status(code, response)) => {
                let body = response.into_string().unwrap_or_default();
                return Err(classify_status(code, body));
            }
            Err(ureq::Error::Transport(t)) => {
                return Err(EndpointError::Transient(format!("transport: {t}")));
            }
        };

        let payload: Value = response
            .into_json()
            .map_err(|e| EndpointError::Fatal(format!("response is not JSON: {e}")))?;
        payload["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| {
                EndpointError::Fatal(format!("response missing choices[0].message.content: {payload}"))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_codes_classify_into_retry_classes() {
        assert!(matches!(classify_status(401, String::new()), EndpointError::Auth(_)));
        assert!(matches!(classify_status(403, String::new()), EndpointError::Auth(_)));
        assert!(matches!(classify_status(429, String::new()), EndpointError::Transient(_)));
        assert!(matches!(classify_status(408, String::new()), EndpointError::Transient(_)));
        assert!(matches!(classify_status(500, String::new()), EndpointError::Transient(_)));
        assert!(matches!(classify_status(503, String::new()), EndpointError::Transient(_)));
        assert!(matches!(classify_status(400, String::new()), EndpointError::Fatal(_)));
        assert!(matches!(classify_status(404, String::new()), EndpointError::Fatal(_)));
    }

    #[test]
    fn text_only_requests_use_plain_string_content() {
        let ep = HttpEndpoint::new("http://localhost:9/v1/", None);
        let body = ep.build_body(&ChatRequest::text("m", "hi").with_system("sys")).unwrap();
        assert_eq!(body["messages"][0]["role"], "system");
        assert_eq!(body["messages"][1]["content"], "hi");
        assert_eq!(body["model"], "m");
    }

    #[test]
    fn image_requests_use_part_arrays() {
        let dir = tempfile::tempdir().unwrap();
        let img = dir.path().join("f.png");
        std::fs::write(&img, b"\x89PNG").unwrap();
        let req = ChatRequest::text("m", "look").with_images([img]);
        let body = HttpEndpoint::new("http://x", None).build_body(&req).unwrap();
        let content = &body["messages"][0]["content"];
        assert!(content.is_array());
        assert_eq!(content[0]["type"], "text");
        assert_eq!(content[1]["type"], "image_url");
        let url = content[1]["image_url"]["url"].as_str().unwrap();
        assert!(url.starts_with("data:image/png;base64,"), "{url}");
    }
}
