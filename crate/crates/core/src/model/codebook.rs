use std::fmt::Write as _;
use std::path::Path;

use crate::error::{invalid, JaddError, Result};
use crate::{CVec, Cx};

const ZERO_TOL: f64 = 1e-12;

/// Whether codewords occupy a subset of the resource elements or all of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodebookKind {
    Sparse,
    Dense,
}

impl CodebookKind {
    fn as_str(self) -> &'static str {
        match self {
            CodebookKind::Sparse => "sparse",
            CodebookKind::Dense => "dense",
        }
    }
}

impl std::str::FromStr for CodebookKind {
    type Err = JaddError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sparse" | "scma" => Ok(CodebookKind::Sparse),
            "dense" | "dcma" => Ok(CodebookKind::Dense),
            other => Err(invalid(format!("unknown codebook kind '{other}'"))),
        }
    }
}

/// Per-user codebooks. `words[j][m]` is codeword `m` of user `j`.
///
/// Construction normalizes every user's codebook to unit average energy and
/// checks the structural invariants of its kind.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    j: usize,
    k: usize,
    m: usize,
    kind: CodebookKind,
    d_v: usize,
    words: Vec<Vec<CVec>>,
}

impl Codebook {
    pub fn new(kind: CodebookKind, mut words: Vec<Vec<CVec>>) -> Result<Self> {
        let j = words.len();
        if j == 0 {
            return Err(invalid("codebook has no users"));
        }
        let m = words[0].len();
        if m == 0 || !m.is_power_of_two() {
            return Err(invalid(format!("codebook size M={m} is not a power of two")));
        }
        let k = words[0][0].len();
        if k == 0 {
            return Err(invalid("codewords have zero length"));
        }
        for (user, book) in words.iter_mut().enumerate() {
            if book.len() != m {
                return Err(invalid(format!("user {user} has {} codewords, expected {m}", book.len())));
            }
            if book.iter().any(|c| c.len() != k) {
                return Err(invalid(format!("user {user} has a codeword of wrong length")));
            }
            let energy = book.iter().map(|c| c.norm_squared()).sum::<f64>() / m as f64;
            if !(energy.is_finite() && energy > 0.0) {
                return Err(invalid(format!("user {user} has zero codebook energy")));
            }
            // Leave already normalized books untouched so text round trips are exact.
            if (energy - 1.0).abs() > 1e-12 {
                let scale = energy.sqrt().recip();
                for c in book.iter_mut() {
                    *c *= Cx::new(scale, 0.0);
                }
            }
        }

        let d_v = match kind {
            CodebookKind::Dense => {
                let has_zero = words.iter().flatten().flat_map(|c| c.iter()).any(|e| e.norm() <= ZERO_TOL);
                if has_zero {
                    return Err(invalid("dense codebook contains a zero entry"));
                }
                k
            }
            CodebookKind::Sparse => {
                let mut d_v = None;
                for (user, book) in words.iter().enumerate() {
                    let pattern = nonzero_pattern(&book[0]);
                    if book.iter().any(|c| nonzero_pattern(c) != pattern) {
                        return Err(invalid(format!("user {user} codewords do not share one support")));
                    }
                    let count = pattern.iter().filter(|&&b| b).count();
                    if count == 0 || count >= k {
                        return Err(invalid(format!("user {user} support size {count} is not in 1..K")));
                    }
                    match d_v {
                        None => d_v = Some(count),
                        Some(d) if d != count => return Err(invalid("sparse codebook has unequal support sizes")),
                        _ => {}
                    }
                }
                d_v.unwrap_or(k)
            }
        };
        Ok(Codebook { j, k, m, kind, d_v, words })
    }

    /// Eight-user, four-RE, four-point sparse codebook with two nonzeros per codeword.
    pub fn scma_default() -> Self {
        Self::parse(include_str!("../../data/scma_j8_k4_m4.txt")).expect("shipped codebook is valid")
    }

    /// Eight-user, four-RE, four-point dense codebook.
    pub fn dcma_default() -> Self {
        Self::parse(include_str!("../../data/dcma_j8_k4_m4.txt")).expect("shipped codebook is valid")
    }

    /// Parses the text format: a header `J K M kind` followed by `J*M` lines of
    /// `K` entries written as `re:im`. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(JaddError::Parse { line: 0, msg: "empty codebook".into() })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(JaddError::Parse { line: hline, msg: "header must be `J K M kind`".into() });
        }
        let num = |s: &str| {
            s.parse::<usize>().map_err(|e| JaddError::Parse { line: hline, msg: format!("bad integer '{s}': {e}") })
        };
        let (j, k, m) = (num(fields[0])?, num(fields[1])?, num(fields[2])?);
        let kind: CodebookKind =
            fields[3].parse().map_err(|e: JaddError| JaddError::Parse { line: hline, msg: e.to_string() })?;

        let mut words = vec![Vec::with_capacity(m); j];
        for idx in 0..j * m {
            let (ln, line) = lines
                .next()
                .ok_or(JaddError::Parse { line: 0, msg: format!("expected {} codeword lines, found {idx}", j * m) })?;
            let entries = line
                .split_whitespace()
                .map(|tok| parse_complex(tok).ok_or(JaddError::Parse { line: ln, msg: format!("bad entry '{tok}'") }))
                .collect::<Result<Vec<Cx>>>()?;
            if entries.len() != k {
                return Err(JaddError::Parse {
                    line: ln,
                    msg: format!("expected {k} entries, found {}", entries.len()),
                });
            }
            words[idx / m].push(CVec::from_vec(entries));
        }
        if let Some((ln, _)) = lines.next() {
            return Err(JaddError::Parse { line: ln, msg: "trailing data after codewords".into() });
        }
        Self::new(kind, words)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Serializes to the text format accepted by [`Codebook::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {} {}\n", self.j, self.k, self.m, self.kind.as_str());
        for c in self.words.iter().flatten() {
            let line: Vec<String> = c.iter().map(|e| format!("{:?}:{:?}", e.re, e.im)).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn num_users(&self) -> usize {
        self.j
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn kind(&self) -> CodebookKind {
        self.kind
    }

    /// Nonzeros per codeword (equal to `K` for dense codebooks).
    pub fn d_v(&self) -> usize {
        self.d_v
    }

    pub fn word(&self, user: usize, index: usize) -> &CVec {
        &self.words[user][index]
    }

    pub fn user_words(&self, user: usize) -> &[CVec] {
        &self.words[user]
    }
}

fn nonzero_pattern(c: &CVec) -> Vec<bool> {
    c.iter().map(|e| e.norm() > ZERO_TOL).collect()
}

fn parse_complex(tok: &str) -> Option<Cx> {
    let (re, im) = tok.split_once(':')?;
    Some(Cx::new(re.parse().ok()?, im.parse().ok()?))
}
