//! Binary timetag file: all channels of one run in a single file.
//!
//! Layout (little-endian):
//!
//! ```text
//! header   "NLTT" | version u16 | channel_count u16 | reserved [u8; 8]
//! records  time_ps u64 | channel u8 | reserved [u8; 7]     (16 bytes each)
//! ```
//!
//! Records are merged across channels in global time order; within each
//! channel times are non-decreasing, and readers enforce that. One file per
//! run keeps provenance atomic.

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::stream::TimetagStream;

pub const MAGIC: [u8; 4] = *b"NLTT";
pub const FORMAT_VERSION: u16 = 1;

const HEADER_LEN: usize = 16;
const RECORD_LEN: usize = 16;

/// Write streams as one merged record sequence. Channels must be the dense
/// set `0..n`; times must be non-negative.
pub fn write_streams<W: Write>(writer: W, streams: &[TimetagStream]) -> Result<()> {
    let n = streams.len();
    if n == 0 || n > u16::MAX as usize {
        return Err(Error::Format(format!("channel count {n} out of range")));
    }
    let mut seen = vec![false; n];
    for s in streams {
        s.check_sorted()?;
        let ch = s.channel as usize;
        if ch >= n || seen[ch] {
            return Err(Error::Format(format!(
                "channels must be the dense set 0..{n}, got duplicate or out-of-range {ch}"
            )));
        }
        seen[ch] = true;
        if let Some(&t) = s.tags.first() {
            if t < 0 {
                return Err(Error::Format(format!(
                    "channel {ch} holds a negative time {t}"
                )));
            }
        }
    }

    let mut w = BufWriter::with_capacity(1 << 20, writer);
    let mut header = [0u8; HEADER_LEN];
    header[..4].copy_from_slice(&MAGIC);
    header[4..6].copy_from_slice(&FORMAT_VERSION.to_le_bytes());
    header[6..8].copy_from_slice(&(n as u16).to_le_bytes());
    w.write_all(&header)?;

    // Merge channels by (time, channel).
    let mut cursors: Vec<(usize, &TimetagStream)> = streams.iter().map(|s| (0, s)).collect();
    cursors.sort_by_key(|(_, s)| s.channel);
    let mut record = [0u8; RECORD_LEN];
    loop {
        let mut best: Option<(i64, usize)> = None;
        for (slot, (idx, s)) in cursors.iter().enumerate() {
            if let Some(&t) = s.tags.get(*idx) {
                if best.map_or(true, |(bt, _)| t < bt) {
                    best = Some((t, slot));
                }
            }
        }
        let Some((t, slot)) = best else { break };
        let channel = cursors[slot].1.channel;
        cursors[slot].0 += 1;
        record[..8].copy_from_slice(&(t as u64).to_le_bytes());
        record[8] = channel;
        record[9..].fill(0);
        w.write_all(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_streams_to_path<P: AsRef<Path>>(path: P, streams: &[TimetagStream]) -> Result<()> {
    write_streams(File::create(path)?, streams)
}

/// Read every channel of a timetag file, returned in channel order.
pub fn read_streams<R: Read>(reader: R) -> Result<Vec<TimetagStream>> {
    let mut r = BufReader::with_capacity(1 << 20, reader);
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header).map_err(|e| {
        if e.kind() == ErrorKind::UnexpectedEof {
            Error::Format("file shorter than the 16-byte header".into())
        } else {
            Error::Io(e)
        }
    })?;
    if header[..4] != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:02x?}, expected {:02x?}",
            &header[..4],
            MAGIC
        )));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported version {version}, expected {FORMAT_VERSION}"
        )));
    }
    let channel_count = u16::from_le_bytes([header[6], header[7]]) as usize;
    if channel_count == 0 {
        return Err(Error::Format("file declares zero channels".into()));
    }

    let mut tags: Vec<Vec<i64>> = vec![Vec::new(); channel_count];
    let mut record = [0u8; RECORD_LEN];
    let mut index = 0usize;
    loop {
        match read_record(&mut r, &mut record)? {
            RecordRead::Eof => break,
            RecordRead::Truncated(got) => {
                return Err(Error::Format(format!(
                    "truncated record {index}: {got} of {RECORD_LEN} bytes"
                )));
            }
            RecordRead::Full => {}
        }
        let time = u64::from_le_bytes(record[..8].try_into().expect("8 bytes"));
        if time > i64::MAX as u64 {
            return Err(Error::Format(format!(
                "record {index}: time {time} exceeds the signed picosecond range"
            )));
        }
        let channel = record[8] as usize;
        if channel >= channel_count {
            return Err(Error::Format(format!(
                "record {index}: channel {channel} >= declared count {channel_count}"
            )));
        }
        tags[channel].push(time as i64);
        index += 1;
    }

    tags.into_iter()
        .enumerate()
        .map(|(ch, t)| {
            TimetagStream::new(ch as u8, t).map_err(|_| {
                Error::Format(format!("channel {ch} records are not time-sorted"))
            })
        })
        .collect()
}

pub fn read_streams_from_path<P: AsRef<Path>>(path: P) -> Result<Vec<TimetagStream>> {
    read_streams(File::open(path)?)
}

enum RecordRead {
    Full,
    Eof,
    Truncated(usize),
}

/// Fill one record, distinguishing a clean end-of-file from a torn record.
fn read_record<R: Read>(r: &mut R, buf: &mut [u8; RECORD_LEN]) -> Result<RecordRead> {
    let mut filled = 0usize;
    while filled < RECORD_LEN {
        match r.read(&mut buf[filled..]) {
            Ok(0) if filled == 0 => return Ok(RecordRead::Eof),
            Ok(0) => return Ok(RecordRead::Truncated(filled)),
            Ok(n) => filled += n,
            Err(e) if e.kind() == ErrorKind::Interrupted => {}
            Err(e) => return Err(Error::Io(e)),
        }
    }
    Ok(RecordRead::Full)
}
