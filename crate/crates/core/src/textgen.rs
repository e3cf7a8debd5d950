//! Review text generation. Output is written to the log only and is never
//! read back by any decision.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AgentId, DecisionRecord, Item, ItemId, Source};

pub const URL_ENV: &str = "GGBOND_TEXTGEN_URL";
pub const TOKEN_ENV: &str = "GGBOND_TEXTGEN_TOKEN";

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("text backend timed out")]
    Timeout,
    #[error("text backend returned an unusable reply: {0}")]
    BadResponse(String),
    #[error("text backend unavailable after {attempts} attempts: {last}")]
    BackendUnavailable { attempts: u32, last: String },
}

/// Social register the text is written for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Circle {
    Friends,
    Colleagues,
    Kindred,
    Public,
}

impl Circle {
    /// Register implied by the strongest per-layer tie with the source.
    pub fn from_layer_weights(weights: Option<[f64; 3]>) -> Circle {
        let Some([wi, wp, ws]) = weights else {
            return Circle::Public;
        };
        if wi <= 0.0 && wp <= 0.0 && ws <= 0.0 {
            Circle::Public
        } else if wi >= wp && wi >= ws {
            Circle::Friends
        } else if ws >= wp {
            Circle::Colleagues
        } else {
            Circle::Kindred
        }
    }

    fn opener(self) -> &'static str {
        match self {
            Circle::Friends => "Hey, just watched",
            Circle::Colleagues => "Quick note on",
            Circle::Kindred => "Thought you might relate to",
            Circle::Public => "Review of",
        }
    }
}

/// Endpoint for the remote backend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endpoint {
    pub url: String,
    pub token: Option<String>,
    pub timeout: Duration,
    pub retries: u32,
}

impl Endpoint {
    pub fn new(url: impl Into<String>) -> Self {
        Endpoint {
            url: url.into(),
            token: None,
            timeout: Duration::from_secs(10),
            retries: 2,
        }
    }

    /// Reads the endpoint from the environment, if configured.
    pub fn from_env() -> Option<Self> {
        let url = std::env::var(URL_ENV).ok().filter(|u| !u.trim().is_empty())?;
        Some(Endpoint {
            token: std::env::var(TOKEN_ENV).ok(),
            ..Endpoint::new(url)
        })
    }
}

#[derive(Serialize)]
struct Request<'a> {
    prompt: &'a str,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct Reply {
    text: String,
}

fn attempt(agent: &ureq::Agent, ep: &Endpoint, prompt: &str, max_tokens: u32) -> std::result::Result<String, BackendError> {
    let mut req = agent.post(&ep.url).header("Content-Type", "application/json");
    if let Some(t) = &ep.token {
        req = req.header("Authorization", &format!("Bearer {t}"));
    }
    let body = serde_json::to_string(&Request { prompt, max_tokens }).expect("request serializes");
    let mut resp = req.send(body.as_bytes()).map_err(|e| match e {
        ureq::Error::Timeout(_) => BackendError::Timeout,
        ureq::Error::StatusCode(code) => BackendError::BadResponse(format!("status {code}")),
        other => BackendError::BackendUnavailable { attempts: 1, last: other.to_string() },
    })?;
    let text = resp
        .body_mut()
        .read_to_string()
        .map_err(|e| BackendError::BadResponse(e.to_string()))?;
    serde_json::from_str::<Reply>(&text)
        .map(|r| r.text)
        .map_err(|e| BackendError::BadResponse(e.to_string()))
}

/// One request with up to `retries` retries on transport failure.
///
/// Malformed replies are not retried.
pub fn backend_request(prompt: &str, ep: &Endpoint, max_tokens: u32) -> std::result::Result<String, BackendError> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(ep.timeout))
        .http_status_as_error(true)
        .build()
        .into();
    let mut last = String::new();
    for k in 0..=ep.retries {
        if k > 0 {
            thread::sleep(Duration::from_millis(50 << k));
        }
        match attempt(&agent, ep, prompt, max_tokens) {
            Ok(text) => return Ok(text),
            Err(BackendError::BadResponse(m)) => return Err(BackendError::BadResponse(m)),
            Err(e) => last = e.to_string(),
        }
    }
    Err(BackendError::BackendUnavailable {
        attempts: ep.retries + 1,
        last,
    })
}

/// Inputs for one review, captured after the decision is sealed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReviewContext {
    pub record: DecisionRecord,
    pub title: String,
    pub genre: Option<String>,
    pub valence: f64,
    pub circle: Circle,
    pub language_mismatch: bool,
}

impl ReviewContext {
    pub fn new(record: DecisionRecord, item: &Item, valence: f64, circle: Circle, agent_language: Option<&str>) -> Self {
        ReviewContext {
            language_mismatch: agent_language.is_some_and(|l| l != item.language),
            title: item.title.clone(),
            genre: item.genres.iter().next().cloned(),
            record,
            valence,
            circle,
        }
    }
}

fn rating_phrase(r: u8) -> &'static str {
    match r {
        5 => "absolutely loved it",
        4 => "really enjoyed it",
        3 => "it was fine, nothing special",
        2 => "was let down by it",
        _ => "honestly disliked it",
    }
}

fn mood_phrase(v: f64) -> &'static str {
    if v > 0.3 {
        "in a great mood lately"
    } else if v < -0.3 {
        "not in the best mood"
    } else {
        "feeling steady"
    }
}

/// Deterministic offline template.
pub fn render_template(ctx: &ReviewContext) -> String {
    let r = ctx.record.rating.unwrap_or(3);
    let genre = ctx.genre.as_deref().unwrap_or("film");
    let mut s = format!(
        "{} \"{}\" and {}. A {} pick, and I'm {}.",
        ctx.circle.opener(),
        ctx.title,
        rating_phrase(r),
        genre,
        mood_phrase(ctx.valence)
    );
    if ctx.language_mismatch {
        s.push_str(" Too many subtitles to follow comfortably, though.");
    }
    s
}

fn prompt_for(ctx: &ReviewContext) -> String {
    format!(
        "Write a two-sentence movie review in a {:?} register. Title: {}. Rating: {}/5. Mood valence: {:.2}.{}",
        ctx.circle,
        ctx.title,
        ctx.record.rating.unwrap_or(3),
        ctx.valence,
        if ctx.language_mismatch { " The viewer struggled with subtitles." } else { "" }
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Review {
    pub t: u32,
    pub agent: AgentId,
    pub source: Source,
    pub item: ItemId,
    pub rating: u8,
    pub backend: String,
    pub fallback: bool,
    pub text: String,
}

/// Renders with the remote backend when given, falling back to templates.
pub fn render_review(ctx: &ReviewContext, endpoint: Option<&Endpoint>) -> Review {
    let (text, backend, fallback) = match endpoint {
        None => (render_template(ctx), "template", false),
        Some(ep) => match backend_request(&prompt_for(ctx), ep, 120) {
            Ok(t) => (t, "remote", false),
            Err(e) => {
                log::warn!("falling back to templates: {e}");
                (render_template(ctx), "template", true)
            }
        },
    };
    Review {
        t: ctx.record.t,
        agent: ctx.record.agent,
        source: ctx.record.source,
        item: ctx.record.item,
        rating: ctx.record.rating.unwrap_or(0),
        backend: backend.into(),
        fallback,
        text,
    }
}

/// Background writer that renders reviews off the simulation thread.
pub struct ReviewWriter {
    tx: Option<mpsc::Sender<ReviewContext>>,
    handle: Option<thread::JoinHandle<Result<usize>>>,
    path: PathBuf,
}

impl ReviewWriter {
    /// Truncates `path` and starts the worker.
    pub fn spawn(path: &Path, endpoint: Option<Endpoint>) -> Result<Self> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        Self::start(file, path, endpoint)
    }

    /// Appends to `path`, used when resuming a run.
    pub fn spawn_append(path: &Path, endpoint: Option<Endpoint>) -> Result<Self> {
        let file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Self::start(file, path, endpoint)
    }

    fn start(file: std::fs::File, path: &Path, endpoint: Option<Endpoint>) -> Result<Self> {
        let (tx, rx) = mpsc::channel::<ReviewContext>();
        let owned = path.to_path_buf();
        let handle = thread::spawn(move || -> Result<usize> {
            let mut out = std::io::BufWriter::new(file);
            let mut n = 0;
            for ctx in rx {
                let review = render_review(&ctx, endpoint.as_ref());
                serde_json::to_writer(&mut out, &review)?;
                out.write_all(b"\n").map_err(|e| Error::io(&owned, e))?;
                n += 1;
            }
            out.flush().map_err(|e| Error::io(&owned, e))?;
            Ok(n)
        });
        Ok(ReviewWriter {
            tx: Some(tx),
            handle: Some(handle),
            path: path.to_path_buf(),
        })
    }

    pub fn submit(&self, ctx: ReviewContext) {
        if let Some(tx) = &self.tx {
            // A dead worker surfaces its error from `finish`.
            let _ = tx.send(ctx);
        }
    }

    /// Waits for the queue to drain and returns the number of reviews written.
    pub fn finish(mut self) -> Result<usize> {
        self.tx.take();
        match self.handle.take().map(|h| h.join()) {
            Some(Ok(r)) => r,
            Some(Err(_)) => Err(Error::InvalidInput(format!("review writer for {} panicked", self.path.display()))),
            None => Ok(0),
        }
    }
}

impl Drop for ReviewWriter {
    fn drop(&mut self) {
        self.tx.take();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}
