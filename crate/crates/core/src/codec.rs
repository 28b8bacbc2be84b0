//! Canonical 32-byte word encoding shared by calldata, event payloads and
//! off-chain record encoding.
//!
//! Integers are big-endian, left-padded to a word. Short byte strings are
//! right-padded with zeros. Dynamic byte strings are a length word followed by
//! the bytes, right-padded to a word boundary.

pub const WORD: usize = 32;
pub type Word = [u8; WORD];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("unexpected end of input")]
    Truncated,
    #[error("integer does not fit in 64 bits")]
    IntegerOverflow,
    #[error("short value longer than {max} bytes")]
    TooLong { max: usize },
    #[error("invalid utf-8")]
    Utf8,
    #[error("non-zero padding")]
    Padding,
    #[error("{0} trailing bytes")]
    Trailing(usize),
    #[error("invalid boolean or tag word")]
    Tag,
}

pub fn word_u64(v: u64) -> Word {
    let mut w = [0u8; WORD];
    w[24..].copy_from_slice(&v.to_be_bytes());
    w
}

/// Right-pads `bytes` into a word; `None` if longer than a word.
pub fn word_padded(bytes: &[u8]) -> Option<Word> {
    if bytes.len() > WORD {
        return None;
    }
    let mut w = [0u8; WORD];
    w[..bytes.len()].copy_from_slice(bytes);
    Some(w)
}

pub fn u64_from_word(w: &Word) -> Result<u64, CodecError> {
    if w[..24].iter().any(|b| *b != 0) {
        return Err(CodecError::IntegerOverflow);
    }
    Ok(u64::from_be_bytes(w[24..].try_into().expect("8 bytes")))
}

/// Strips right padding; the caller guarantees values never end in a zero byte.
pub fn trim_padding(w: &[u8]) -> &[u8] {
    let end = w.iter().rposition(|b| *b != 0).map_or(0, |i| i + 1);
    &w[..end]
}

#[derive(Debug, Default, Clone)]
pub struct WordWriter {
    buf: Vec<u8>,
}

impl WordWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn u64(mut self, v: u64) -> Self {
        self.buf.extend_from_slice(&word_u64(v));
        self
    }

    pub fn bool(self, v: bool) -> Self {
        self.u64(v as u64)
    }

    pub fn word(mut self, w: &Word) -> Self {
        self.buf.extend_from_slice(w);
        self
    }

    /// Right-padded short value; panics if longer than a word, so callers
    /// validate lengths first.
    pub fn short(mut self, bytes: &[u8]) -> Self {
        let w = word_padded(bytes).expect("short value fits in a word");
        self.buf.extend_from_slice(&w);
        self
    }

    pub fn dynamic(mut self, bytes: &[u8]) -> Self {
        self.buf.extend_from_slice(&word_u64(bytes.len() as u64));
        self.buf.extend_from_slice(bytes);
        let rem = bytes.len() % WORD;
        if rem != 0 {
            self.buf.extend(std::iter::repeat_n(0u8, WORD - rem));
        }
        self
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

#[derive(Debug, Clone)]
pub struct WordReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> WordReader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        let end = self.pos.checked_add(n).ok_or(CodecError::Truncated)?;
        let out = self.buf.get(self.pos..end).ok_or(CodecError::Truncated)?;
        self.pos = end;
        Ok(out)
    }

    pub fn word(&mut self) -> Result<Word, CodecError> {
        Ok(self.take(WORD)?.try_into().expect("word"))
    }

    pub fn u64(&mut self) -> Result<u64, CodecError> {
        u64_from_word(&self.word()?)
    }

    pub fn bool(&mut self) -> Result<bool, CodecError> {
        match self.u64()? {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(CodecError::Tag),
        }
    }

    /// Reads a right-padded short value of at most `max` bytes.
    pub fn short(&mut self, max: usize) -> Result<Vec<u8>, CodecError> {
        let w = self.word()?;
        let body = trim_padding(&w);
        if body.len() > max {
            return Err(CodecError::TooLong { max });
        }
        Ok(body.to_vec())
    }

    pub fn short_str(&mut self, max: usize) -> Result<String, CodecError> {
        String::from_utf8(self.short(max)?).map_err(|_| CodecError::Utf8)
    }

    pub fn dynamic(&mut self) -> Result<Vec<u8>, CodecError> {
        let len = usize::try_from(self.u64()?).map_err(|_| CodecError::IntegerOverflow)?;
        let padded = len.div_ceil(WORD) * WORD;
        let raw = self.take(padded)?;
        if raw[len..].iter().any(|b| *b != 0) {
            return Err(CodecError::Padding);
        }
        Ok(raw[..len].to_vec())
    }

    pub fn dynamic_str(&mut self) -> Result<String, CodecError> {
        String::from_utf8(self.dynamic()?).map_err(|_| CodecError::Utf8)
    }

    pub fn finish(self) -> Result<(), CodecError> {
        match self.buf.len() - self.pos {
            0 => Ok(()),
            n => Err(CodecError::Trailing(n)),
        }
    }
}
