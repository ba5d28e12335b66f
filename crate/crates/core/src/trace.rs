//! JSON-lines trajectory output: one frame per line,
//! `{"step":..,"sheep":[[x,y,captured],..],"dogs":[[x,y],..]}`.
//!
//! Coordinates use the shortest representation that reads back to the same
//! `f64`.

use std::io::{self, Write};

use crate::sim::TraceFrame;

pub fn write_jsonl<W: Write>(frames: &[TraceFrame], mut out: W) -> io::Result<()> {
    for frame in frames {
        serde_json::to_writer(&mut out, frame)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_jsonl(text: &str) -> Result<Vec<TraceFrame>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_layout() {
        let frame = TraceFrame {
            step: 3,
            sheep: vec![(60.5, 50.0, false), (0.0, 100.0, true)],
            dogs: vec![(12.25, 80.0)],
        };
        let mut buf = Vec::new();
        write_jsonl(std::slice::from_ref(&frame), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "{\"step\":3,\"sheep\":[[60.5,50.0,false],[0.0,100.0,true]],\"dogs\":[[12.25,80.0]]}\n"
        );
        assert_eq!(read_jsonl(&text).unwrap(), vec![frame]);
    }
}
