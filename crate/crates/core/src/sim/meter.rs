//! Byte-counting read wrapper. The repair center only sees helper uploads
//! through it, so the count is the download actually performed.

use std::io::{self, Read};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

#[derive(Debug, Clone, Default)]
pub struct ByteMeter(Arc<AtomicU64>);

impl ByteMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bytes(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    pub fn wrap<R: Read>(&self, inner: R) -> MeteredReader<R> {
        MeteredReader {
            inner,
            meter: self.clone(),
        }
    }
}

#[derive(Debug)]
pub struct MeteredReader<R> {
    inner: R,
    meter: ByteMeter,
}

impl<R: Read> Read for MeteredReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.meter.0.fetch_add(n as u64, Ordering::Relaxed);
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_every_byte_across_readers() {
        let meter = ByteMeter::new();
        let mut a = meter.wrap(&b"hello"[..]);
        let mut b = meter.wrap(&b"world!"[..]);
        let mut sink = Vec::new();
        a.read_to_end(&mut sink).unwrap();
        let mut two = [0u8; 2];
        b.read_exact(&mut two).unwrap();
        assert_eq!(meter.bytes(), 7);
    }
}
