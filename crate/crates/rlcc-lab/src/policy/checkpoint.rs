//! Versioned text checkpoint for the MLP policy.
//!
//! Layout: header lines (`window`, `input`, `hidden`, `y_min`, `y_max`)
//! followed by the row-major weight matrices. Floats are written with 17
//! significant digits so a load reproduces the policy bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::policy::{ActionMapper, MlpPolicy};

const MAGIC: &str = "rlcc-policy v1";

/// A trained policy together with everything needed to run it: the sliding
/// window length and the action clamp bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyCheckpoint {
    pub window_len: usize,
    pub mlp: MlpPolicy,
    pub mapper: ActionMapper,
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl PolicyCheckpoint {
    pub fn to_text(&self) -> String {
        let mlp = &self.mlp;
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "window {}", self.window_len);
        let _ = writeln!(out, "input {}", mlp.input_dim());
        let _ = writeln!(out, "hidden {}", mlp.hidden_dim());
        let _ = writeln!(out, "y_min {}", fmt_f64(self.mapper.y_min()));
        let _ = writeln!(out, "y_max {}", fmt_f64(self.mapper.y_max()));
        let _ = writeln!(out, "w1");
        for row in mlp.w1().chunks_exact(mlp.input_dim()) {
            let line: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        let _ = writeln!(out, "b1");
        let line: Vec<String> = mlp.b1().iter().map(|v| fmt_f64(*v)).collect();
        let _ = writeln!(out, "{}", line.join(" "));
        let _ = writeln!(out, "w2");
        let line: Vec<String> = mlp.w2().iter().map(|v| fmt_f64(*v)).collect();
        let _ = writeln!(out, "{}", line.join(" "));
        let _ = writeln!(out, "b2");
        let _ = writeln!(out, "{}", fmt_f64(mlp.b2()));
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let ctx = "policy checkpoint";
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let magic = lines.next().ok_or_else(|| Error::parse(ctx, "empty file"))?;
        if magic != MAGIC {
            return Err(Error::parse(ctx, format!("unknown format: {magic:?}")));
        }
        let mut header_num = |name: &str| -> Result<f64> {
            let line = lines
                .next()
                .ok_or_else(|| Error::parse(ctx, format!("missing {name}")))?;
            let (key, value) = line
                .split_once(' ')
                .ok_or_else(|| Error::parse(ctx, format!("malformed {name} line")))?;
            if key != name {
                return Err(Error::parse(ctx, format!("expected {name}, found {key}")));
            }
            value
                .parse::<f64>()
                .map_err(|e| Error::parse(ctx, format!("{name}: {e}")))
        };
        let window_len = header_num("window")? as usize;
        let input_dim = header_num("input")? as usize;
        let hidden_dim = header_num("hidden")? as usize;
        let y_min = header_num("y_min")?;
        let y_max = header_num("y_max")?;
        if window_len == 0 || input_dim != 2 * window_len || hidden_dim == 0 {
            return Err(Error::parse(ctx, "inconsistent header dimensions"));
        }
        if !(y_min < y_max) {
            return Err(Error::parse(ctx, "clamp bounds out of order"));
        }

        let expect_marker = |name: &str, lines: &mut dyn Iterator<Item = &str>| -> Result<()> {
            match lines.next() {
                Some(l) if l == name => Ok(()),
                other => Err(Error::parse(ctx, format!("expected {name}, found {other:?}"))),
            }
        };
        let parse_row = |line: &str| -> Result<Vec<f64>> {
            line.split_whitespace()
                .map(|tok| tok.parse::<f64>().map_err(|e| Error::parse(ctx, e.to_string())))
                .collect()
        };

        expect_marker("w1", &mut lines)?;
        let mut w1 = Vec::with_capacity(hidden_dim * input_dim);
        for _ in 0..hidden_dim {
            let line = lines.next().ok_or_else(|| Error::parse(ctx, "truncated w1"))?;
            let row = parse_row(line)?;
            if row.len() != input_dim {
                return Err(Error::parse(ctx, "w1 row width mismatch"));
            }
            w1.extend(row);
        }
        expect_marker("b1", &mut lines)?;
        let b1 = parse_row(lines.next().ok_or_else(|| Error::parse(ctx, "truncated b1"))?)?;
        expect_marker("w2", &mut lines)?;
        let w2 = parse_row(lines.next().ok_or_else(|| Error::parse(ctx, "truncated w2"))?)?;
        expect_marker("b2", &mut lines)?;
        let b2_row = parse_row(lines.next().ok_or_else(|| Error::parse(ctx, "truncated b2"))?)?;
        if b1.len() != hidden_dim || w2.len() != hidden_dim || b2_row.len() != 1 {
            return Err(Error::parse(ctx, "vector length mismatch"));
        }

        let mlp = MlpPolicy::from_parts(input_dim, hidden_dim, w1, b1, w2, b2_row[0])?;
        Ok(PolicyCheckpoint {
            window_len,
            mlp,
            mapper: ActionMapper::new(y_min, y_max),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| {
            Error::parse(
                "policy checkpoint",
                format!("{}: {e}", path.as_ref().display()),
            )
        })?;
        Self::from_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let ckpt = PolicyCheckpoint {
            window_len: 5,
            mlp: MlpPolicy::random(10, 16, 0.1, &mut rng),
            mapper: ActionMapper::default(),
        };
        let text = ckpt.to_text();
        let loaded = PolicyCheckpoint::from_text(&text).unwrap();
        assert_eq!(ckpt, loaded);
        let x: Vec<f64> = (0..10).map(|i| (i as f64).cos() * 0.3).collect();
        assert_eq!(ckpt.mlp.forward(&x).to_bits(), loaded.mlp.forward(&x).to_bits());
    }

    #[test]
    fn rejects_garbage() {
        assert!(PolicyCheckpoint::from_text("").is_err());
        assert!(PolicyCheckpoint::from_text("not a checkpoint").is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ckpt = PolicyCheckpoint {
            window_len: 2,
            mlp: MlpPolicy::random(4, 3, 0.1, &mut rng),
            mapper: ActionMapper::default(),
        };
        let text = ckpt.to_text();
        let truncated = &text[..text.len() / 2];
        assert!(PolicyCheckpoint::from_text(truncated).is_err());
    }
}
