//! Embedding providers.
//!
//! External providers are separate processes speaking a line protocol on their
//! standard streams:
//!
//! ```text
//! -> IMG <frame-file-path>
//! -> TXT <base64 of UTF-8 text>
//! <- OK <D> <base64 of D little-endian f32>
//! <- ERR <message>
//! ```

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use super::embedding::EmbeddingVector;
use crate::clip::{quantize, FrameRef};
use crate::error::{Error, Result};

pub trait EmbeddingProvider {
    /// Identity recorded in reports.
    fn id(&self) -> String;

    fn embed_image(&mut self, frame: FrameRef<'_>) -> Result<EmbeddingVector>;

    /// `Ok(None)` when the provider has no text tower.
    fn embed_text(&mut self, text: &str) -> Result<Option<EmbeddingVector>>;
}

pub const MOCK_DIM: usize = 64;

fn hashed_unit_vector(domain: &[u8], payload: &[u8], dim: usize) -> EmbeddingVector {
    let mut hasher = Sha256::new();
    hasher.update(domain);
    hasher.update(payload);
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    let mut rng = ChaCha8Rng::from_seed(seed);
    let values: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    EmbeddingVector::new(&values).expect("gaussian draw is non-zero")
}

/// Mock embedding of an 8-bit RGB frame: a unit Gaussian vector seeded by a hash of
/// its size and pixels.
pub fn mock_image_embedding(width: u32, height: u32, rgb8: &[u8], dim: usize) -> EmbeddingVector {
    let mut payload = Vec::with_capacity(8 + rgb8.len());
    payload.extend_from_slice(&width.to_le_bytes());
    payload.extend_from_slice(&height.to_le_bytes());
    payload.extend_from_slice(rgb8);
    hashed_unit_vector(b"IMG", &payload, dim)
}

pub fn mock_text_embedding(text: &str, dim: usize) -> EmbeddingVector {
    hashed_unit_vector(b"TXT", text.as_bytes(), dim)
}

/// Deterministic in-process provider: identical 8-bit frames map to identical
/// vectors, different frames to (almost surely) different ones.
#[derive(Debug, Clone)]
pub struct MockProvider {
    pub dim: usize,
}

impl Default for MockProvider {
    fn default() -> Self {
        MockProvider { dim: MOCK_DIM }
    }
}

impl EmbeddingProvider for MockProvider {
    fn id(&self) -> String {
        format!("mock-sha256-d{}", self.dim)
    }

    fn embed_image(&mut self, frame: FrameRef<'_>) -> Result<EmbeddingVector> {
        let bytes: Vec<u8> = frame.data.iter().map(|&v| quantize(v)).collect();
        Ok(mock_image_embedding(
            frame.width as u32,
            frame.height as u32,
            &bytes,
            self.dim,
        ))
    }

    fn embed_text(&mut self, text: &str) -> Result<Option<EmbeddingVector>> {
        Ok(Some(mock_text_embedding(text, self.dim)))
    }
}

pub fn encode_embedding(values: &[f32]) -> String {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    format!("OK {} {}", values.len(), B64.encode(bytes))
}

/// Parses one response line into raw (not yet normalized) values.
pub fn decode_response(line: &str) -> Result<Vec<f32>> {
    let line = line.trim_end_matches(['\r', '\n']);
    if let Some(msg) = line.strip_prefix("ERR") {
        return Err(Error::Provider(msg.trim().to_string()));
    }
    let rest = line
        .strip_prefix("OK ")
        .ok_or_else(|| Error::Provider(format!("malformed response {line:?}")))?;
    let (dim, payload) = rest
        .split_once(' ')
        .ok_or_else(|| Error::Provider(format!("malformed response {line:?}")))?;
    let dim: usize = dim
        .parse()
        .map_err(|_| Error::Provider(format!("bad dimension {dim:?}")))?;
    let bytes = B64
        .decode(payload.trim())
        .map_err(|e| Error::Provider(format!("bad base64 payload: {e}")))?;
    if bytes.len() != dim * 4 || dim == 0 {
        return Err(Error::Provider(format!(
            "payload holds {} bytes, expected {} for D={dim}",
            bytes.len(),
            dim * 4
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

/// Client for an external provider process started with `sh -c <command>`.
/// Frames are written as PNG files into a private temporary directory.
pub struct ProcessProvider {
    command: String,
    child: Child,
    stdin: BufWriter<ChildStdin>,
    stdout: BufReader<ChildStdout>,
    scratch: tempfile::TempDir,
    counter: usize,
}

impl ProcessProvider {
    pub fn spawn(command: &str) -> Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Provider(format!("failed to start {command:?}: {e}")))?;
        let stdin = BufWriter::new(child.stdin.take().expect("piped stdin"));
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(ProcessProvider {
            command: command.to_string(),
            child,
            stdin,
            stdout,
            scratch: tempfile::tempdir()?,
            counter: 0,
        })
    }

    fn request(&mut self, line: &str) -> Result<EmbeddingVector> {
        let io_err = |e: std::io::Error| Error::Provider(format!("provider stream: {e}"));
        writeln!(self.stdin, "{line}").map_err(io_err)?;
        self.stdin.flush().map_err(io_err)?;
        let mut response = String::new();
        if self.stdout.read_line(&mut response).map_err(io_err)? == 0 {
            return Err(Error::Provider("provider closed its output".into()));
        }
        EmbeddingVector::new(&decode_response(&response)?)
    }
}

impl EmbeddingProvider for ProcessProvider {
    fn id(&self) -> String {
        self.command.clone()
    }

    fn embed_image(&mut self, frame: FrameRef<'_>) -> Result<EmbeddingVector> {
        let bytes: Vec<u8> = frame.data.iter().map(|&v| quantize(v)).collect();
        let img = image::RgbImage::from_raw(frame.width as u32, frame.height as u32, bytes)
            .expect("frame buffer sized from dims");
        let path = self
            .scratch
            .path()
            .join(format!("q{:08}.png", self.counter));
        self.counter += 1;
        img.save(&path)?;
        let result = self.request(&format!("IMG {}", path.display()));
        let _ = std::fs::remove_file(&path);
        result
    }

    fn embed_text(&mut self, text: &str) -> Result<Option<EmbeddingVector>> {
        self.request(&format!("TXT {}", B64.encode(text.as_bytes())))
            .map(Some)
    }
}

impl Drop for ProcessProvider {
    fn drop(&mut self) {
        let _ = self.stdin.flush();
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn serve_one(line: &str, dim: usize) -> Result<EmbeddingVector> {
    if let Some(path) = line.strip_prefix("IMG ") {
        let img = image::open(Path::new(path.trim()))
            .map_err(|e| Error::Provider(format!("cannot read {path}: {e}")))?
            .to_rgb8();
        Ok(mock_image_embedding(
            img.width(),
            img.height(),
            img.as_raw(),
            dim,
        ))
    } else if let Some(b64) = line.strip_prefix("TXT ") {
        let bytes = B64
            .decode(b64.trim())
            .map_err(|e| Error::Provider(format!("bad base64: {e}")))?;
        let text =
            String::from_utf8(bytes).map_err(|e| Error::Provider(format!("bad utf-8: {e}")))?;
        Ok(mock_text_embedding(&text, dim))
    } else {
        Err(Error::Provider(format!("unknown request {line:?}")))
    }
}

/// Runs the mock provider protocol until `input` is exhausted.
pub fn serve_mock(input: impl BufRead, mut output: impl Write, dim: usize) -> Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = match serve_one(&line, dim) {
            Ok(v) => {
                let values: Vec<f32> = v.as_slice().iter().map(|&x| x as f32).collect();
                encode_embedding(&values)
            }
            Err(e) => format!("ERR {}", e.to_string().replace('\n', " ")),
        };
        writeln!(output, "{response}")?;
        output.flush()?;
    }
    Ok(())
}
