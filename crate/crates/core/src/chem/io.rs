//! Readers and writers for the on-disk space formats.
//!
//! * blocks: JSON lines, `{"id", "tags": [...], "fp": "<hex>", "scores": [...]?}`
//! * templates: one JSON array of `{"id", "slots": [[tags]...], "product_tag", "combine": "or"}`
//! * fragments: JSON lines, `{"id", "fp": "<hex>"}`

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use super::{BuildingBlock, Fingerprint, ReactionTemplate, SpaceError};

#[derive(Debug, Serialize, Deserialize)]
struct BlockRecord {
    id: String,
    tags: Vec<String>,
    fp: Fingerprint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scores: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fragment {
    pub id: String,
    #[serde(rename = "fp")]
    pub fingerprint: Fingerprint,
}

fn for_each_json_line<R, T, F>(reader: R, mut f: F) -> Result<(), SpaceError>
where
    R: BufRead,
    T: for<'de> Deserialize<'de>,
    F: FnMut(T),
{
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| SpaceError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        f(record);
    }
    Ok(())
}

pub fn read_blocks<R: BufRead>(reader: R) -> Result<Vec<BuildingBlock>, SpaceError> {
    let mut blocks = Vec::new();
    for_each_json_line(reader, |r: BlockRecord| {
        blocks.push(BuildingBlock {
            id: r.id,
            tags: r.tags.into_iter().collect(),
            fingerprint: r.fp,
            scores: r.scores,
        })
    })?;
    Ok(blocks)
}

pub fn write_blocks<W: Write>(mut writer: W, blocks: &[BuildingBlock]) -> Result<(), SpaceError> {
    for b in blocks {
        let record = BlockRecord {
            id: b.id.clone(),
            tags: b.tags.iter().cloned().collect(),
            fp: b.fingerprint.clone(),
            scores: b.scores.clone(),
        };
        let line = serde_json::to_string(&record).map_err(|e| SpaceError::Io(e.to_string()))?;
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

pub fn read_templates<R: Read>(reader: R) -> Result<Vec<ReactionTemplate>, SpaceError> {
    let templates: Vec<ReactionTemplate> =
        serde_json::from_reader(reader).map_err(|e| SpaceError::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
    for t in &templates {
        t.validate()?;
    }
    Ok(templates)
}

pub fn read_fragments<R: BufRead>(reader: R) -> Result<Vec<Fragment>, SpaceError> {
    let mut out = Vec::new();
    for_each_json_line(reader, |f: Fragment| out.push(f))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_roundtrip() {
        let text = r#"{"id":"A","tags":["amine"],"fp":"c0","scores":[0.5,-9.0]}

{"id":"B","tags":["acid","ester"],"fp":"03"}
"#;
        let blocks = read_blocks(text.as_bytes()).unwrap();
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].scores, Some(vec![0.5, -9.0]));
        assert_eq!(blocks[1].tags.len(), 2);
        assert_eq!(blocks[1].fingerprint.width(), 8);
        let mut out = Vec::new();
        write_blocks(&mut out, &blocks).unwrap();
        assert_eq!(read_blocks(out.as_slice()).unwrap(), blocks);
    }

    #[test]
    fn parse_errors_carry_line() {
        let text = "{\"id\":\"A\",\"tags\":[\"a\"],\"fp\":\"c0\"}\n{\"id\":\"B\",\"tags\":[\"a\"],\"fp\":\"xx\"}\n";
        assert!(matches!(
            read_blocks(text.as_bytes()),
            Err(SpaceError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn templates_and_fragments() {
        let text = r#"[{"id":"amide","slots":[["amine"],["acid"]],"product_tag":"amide","combine":"or"},
                       {"id":"reduce","slots":[["ketone"]],"product_tag":"alcohol"}]"#;
        let t = read_templates(text.as_bytes()).unwrap();
        assert_eq!(t[0].arity(), 2);
        assert_eq!(t[1].arity(), 1);
        let bad = r#"[{"id":"x","slots":[],"product_tag":"p"}]"#;
        assert!(matches!(
            read_templates(bad.as_bytes()),
            Err(SpaceError::Invalid { .. })
        ));

        let frags = read_fragments("{\"id\":\"f1\",\"fp\":\"f0\"}\n".as_bytes()).unwrap();
        assert_eq!(frags[0].fingerprint.count_ones(), 4);
    }
}
