//! Descriptive records (notices) and their composite subject headings.
//!
//! A notices file looks like
//!
//! ```xml
//! <NOTICES>
//!   <NOTICE id="n1">
//!     <DEE>Eaux minérales -- Pyrénées (France) -- 18e siècle</DEE>
//!     <TITRE>...</TITRE>
//!     <LEGENDE>...</LEGENDE>
//!   </NOTICE>
//! </NOTICES>
//! ```
//!
//! Every `DEE` is a subject heading made of authority terms separated by `--`.

use std::collections::BTreeSet;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

pub const HEADING_SEPARATOR: &str = "--";

/// An ordered, non-empty list of authority terms. Index 0 is the head.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubjectHeading {
    terms: Vec<String>,
}

impl SubjectHeading {
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// The authority placed at the front of the heading.
    pub fn head(&self) -> &str {
        &self.terms[0]
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl std::fmt::Display for SubjectHeading {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.terms.join(" -- "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Notice {
    pub id: String,
    pub headings: Vec<SubjectHeading>,
    pub title: Option<String>,
    pub legend: Option<String>,
}

/// Splits a raw heading on the ASCII `--` token. Em and en dashes are kept
/// inside terms.
pub fn split_heading(raw: &str) -> Result<SubjectHeading> {
    let mut terms = Vec::new();
    for piece in raw.split(HEADING_SEPARATOR) {
        let piece = piece.trim();
        if piece.is_empty() {
            return Err(Error::validation(format!(
                "subject heading {raw:?} contains an empty term"
            )));
        }
        terms.push(piece.to_string());
    }
    Ok(SubjectHeading { terms })
}

pub fn head_term(heading: &SubjectHeading) -> &str {
    heading.head()
}

fn line_of(input: &str, pos: usize) -> usize {
    let end = pos.min(input.len());
    input.as_bytes()[..end].iter().filter(|&&b| b == b'\n').count() + 1
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FieldKind {
    Heading,
    Title,
    Legend,
}

#[derive(Debug)]
struct NoticeDraft {
    id: String,
    headings: Vec<SubjectHeading>,
    title: Option<String>,
    legend: Option<String>,
}

#[derive(Debug)]
enum Frame {
    Root,
    Notice(NoticeDraft),
    Field(FieldKind, String),
    Skip,
}

struct NoticeParser<'a> {
    input: &'a str,
    reader: Reader<&'a [u8]>,
    stack: Vec<Frame>,
    notices: Vec<Notice>,
    seen_ids: BTreeSet<String>,
    root_done: bool,
}

impl<'a> NoticeParser<'a> {
    fn new(input: &'a str) -> Self {
        let mut reader = Reader::from_str(input);
        reader.config_mut().check_end_names = true;
        NoticeParser {
            input,
            reader,
            stack: Vec::new(),
            notices: Vec::new(),
            seen_ids: BTreeSet::new(),
            root_done: false,
        }
    }

    fn line(&self) -> usize {
        line_of(self.input, self.reader.buffer_position() as usize)
    }

    fn parse_err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line(),
            message: message.into(),
        }
    }

    fn run(mut self) -> Result<Vec<Notice>> {
        loop {
            let event = match self.reader.read_event() {
                Ok(ev) => ev,
                Err(e) => {
                    let pos = self.reader.error_position() as usize;
                    return Err(Error::Parse {
                        line: line_of(self.input, pos),
                        message: e.to_string(),
                    });
                }
            };
            match event {
                Event::Start(start) => self.open(&start, false)?,
                Event::Empty(start) => self.open(&start, true)?,
                Event::End(_) => self.close()?,
                Event::Text(text) => {
                    let decoded = text.unescape().map_err(|e| self.parse_err(e.to_string()))?;
                    self.text(&decoded)?;
                }
                Event::CData(data) => {
                    let raw = std::str::from_utf8(data.as_ref())
                        .map_err(|e| self.parse_err(e.to_string()))?
                        .to_string();
                    self.text(&raw)?;
                }
                Event::Eof => break,
                Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_) => {}
            }
        }
        if let Some(frame) = self.stack.last() {
            let what = match frame {
                Frame::Root => "NOTICES",
                Frame::Notice(_) => "NOTICE",
                Frame::Field(..) | Frame::Skip => "element",
            };
            return Err(self.parse_err(format!("unexpected end of input inside unclosed {what}")));
        }
        if !self.root_done {
            return Err(self.parse_err("missing <NOTICES> root element"));
        }
        Ok(self.notices)
    }

    fn open(&mut self, start: &BytesStart<'_>, empty: bool) -> Result<()> {
        let name = String::from_utf8_lossy(start.name().as_ref()).into_owned();
        let frame = match self.stack.last() {
            None => {
                if self.root_done {
                    return Err(self.parse_err(format!("unexpected element <{name}> after root")));
                }
                if name != "NOTICES" {
                    return Err(self.parse_err(format!("expected <NOTICES> root, found <{name}>")));
                }
                Frame::Root
            }
            Some(Frame::Root) if name == "NOTICE" => Frame::Notice(self.notice_draft(start)?),
            Some(Frame::Notice(_)) => match name.as_str() {
                "DEE" => Frame::Field(FieldKind::Heading, String::new()),
                "TITRE" => Frame::Field(FieldKind::Title, String::new()),
                "LEGENDE" => Frame::Field(FieldKind::Legend, String::new()),
                _ => Frame::Skip,
            },
            Some(_) => Frame::Skip,
        };
        self.stack.push(frame);
        if empty {
            self.close()?;
        }
        Ok(())
    }

    fn notice_draft(&mut self, start: &BytesStart<'_>) -> Result<NoticeDraft> {
        let attr = start
            .try_get_attribute("id")
            .map_err(|e| self.parse_err(e.to_string()))?;
        let Some(attr) = attr else {
            return Err(Error::validation(format!(
                "NOTICE at line {} has no id attribute",
                self.line()
            )));
        };
        let id = attr
            .unescape_value()
            .map_err(|e| self.parse_err(e.to_string()))?
            .nfc()
            .collect::<String>()
            .trim()
            .to_string();
        if id.is_empty() {
            return Err(Error::validation(format!(
                "NOTICE at line {} has an empty id",
                self.line()
            )));
        }
        if !self.seen_ids.insert(id.clone()) {
            return Err(Error::validation(format!("duplicate notice id {id:?}")));
        }
        Ok(NoticeDraft {
            id,
            headings: Vec::new(),
            title: None,
            legend: None,
        })
    }

    fn text(&mut self, text: &str) -> Result<()> {
        for frame in self.stack.iter_mut().rev() {
            match frame {
                Frame::Field(_, buf) => {
                    buf.push_str(text);
                    return Ok(());
                }
                Frame::Skip => continue,
                Frame::Root | Frame::Notice(_) => return Ok(()),
            }
        }
        if !text.trim().is_empty() {
            return Err(self.parse_err("character data outside the root element"));
        }
        Ok(())
    }

    fn close(&mut self) -> Result<()> {
        let Some(frame) = self.stack.pop() else {
            return Err(self.parse_err("unbalanced end tag"));
        };
        match frame {
            Frame::Root => self.root_done = true,
            Frame::Notice(draft) => self.notices.push(Notice {
                id: draft.id,
                headings: draft.headings,
                title: draft.title,
                legend: draft.legend,
            }),
            Frame::Field(kind, raw) => {
                let Some(Frame::Notice(draft)) = self.stack.last_mut() else {
                    unreachable!("field frames are only pushed under a notice");
                };
                let text: String = raw.nfc().collect();
                match kind {
                    FieldKind::Heading => {
                        let heading = split_heading(&text)
                            .map_err(|e| Error::validation(format!("notice {:?}: {e}", draft.id)))?;
                        draft.headings.push(heading);
                    }
                    FieldKind::Title | FieldKind::Legend => {
                        let (slot, tag) = if kind == FieldKind::Title {
                            (&mut draft.title, "TITRE")
                        } else {
                            (&mut draft.legend, "LEGENDE")
                        };
                        if slot.is_some() {
                            return Err(Error::validation(format!(
                                "notice {:?} has more than one {tag}",
                                draft.id
                            )));
                        }
                        let value = collapse_ws(&text);
                        if !value.is_empty() {
                            *slot = Some(value);
                        }
                    }
                }
            }
            Frame::Skip => {}
        }
        Ok(())
    }
}

/// Parses a notices document into records in document order.
pub fn parse_notices(content: &str) -> Result<Vec<Notice>> {
    NoticeParser::new(content).run()
}
