//! Plain-text model files.
//!
//! The first line is a tab-separated header
//! `leftcorner-model <version> <kind> start=<cat> binarized=<0|1>`; every
//! following line is one tab-separated count record:
//!
//! ```text
//! RULE   lhs rhs.. count                  (pcfg)
//! SHIFT  gc lc count                      (plcg, delta)
//! ATT    lc gc attach total               (plcg)
//! PROJ   gc lc lhs rhs.. count            (plcg)
//! DATT   len lc gc count                  (delta)
//! DPROJ  len lc gc delta lhs rhs.. count  (delta)
//! ```
//!
//! Probabilities are recomputed from the counts on load.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Choice, DeltaModel, PcfgModel, PlcgModel, Rule};
use crate::error::{Error, Result};

pub const MAGIC: &str = "leftcorner-model";
pub const VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Pcfg(PcfgModel),
    Plcg(PlcgModel),
    Delta(DeltaModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Pcfg(_) => "pcfg",
            Model::Plcg(_) => "plcg",
            Model::Delta(_) => "delta",
        }
    }

    pub fn start(&self) -> &str {
        match self {
            Model::Pcfg(m) => &m.start,
            Model::Plcg(m) => &m.start,
            Model::Delta(m) => &m.start,
        }
    }

    pub fn binarized(&self) -> bool {
        match self {
            Model::Pcfg(m) => m.binarized,
            Model::Plcg(m) => m.binarized,
            Model::Delta(m) => m.binarized,
        }
    }
}

fn record<W: Write>(out: &mut W, fields: &[&str]) -> std::io::Result<()> {
    writeln!(out, "{}", fields.join("\t"))
}

fn rule_fields(rule: &Rule) -> Vec<&str> {
    let mut v = vec![rule.lhs.as_str()];
    v.extend(rule.rhs.iter().map(String::as_str));
    v
}

pub fn write_model<W: Write>(model: &Model, mut out: W) -> Result<()> {
    let start = format!("start={}", model.start());
    let bin = format!("binarized={}", u8::from(model.binarized()));
    record(&mut out, &[MAGIC, VERSION, model.kind(), &start, &bin])?;
    match model {
        Model::Pcfg(m) => {
            for (rule, count) in m.rules() {
                let c = count.to_string();
                let mut f = vec!["RULE"];
                f.extend(rule_fields(rule));
                f.push(&c);
                record(&mut out, &f)?;
            }
        }
        Model::Plcg(m) => {
            for (gc, lcs) in &m.shift {
                for (lc, count) in lcs {
                    record(&mut out, &["SHIFT", gc, lc, &count.to_string()])?;
                }
            }
            for sym in m.attach.keys() {
                let (a, t) = (m.attach_count(sym), m.attach_total(sym));
                record(&mut out, &["ATT", sym, sym, &a.to_string(), &t.to_string()])?;
            }
            for ((gc, lc), rules) in &m.proj {
                for (rule, count) in rules {
                    let c = count.to_string();
                    let mut f = vec!["PROJ", gc.as_str(), lc.as_str()];
                    f.extend(rule_fields(rule));
                    f.push(&c);
                    record(&mut out, &f)?;
                }
            }
        }
        Model::Delta(m) => {
            for (gc, lcs) in &m.shift {
                for (lc, count) in lcs {
                    record(&mut out, &["SHIFT", gc, lc, &count.to_string()])?;
                }
            }
            for ((len, lc, gc), by_delta) in &m.choices {
                let len = len.to_string();
                for (delta, choices) in by_delta {
                    let d = delta.to_string();
                    for (choice, count) in choices {
                        let c = count.to_string();
                        let f = match choice {
                            Choice::Attach => vec!["DATT", &len, lc, gc, &c],
                            Choice::Rule(rule) => {
                                let mut f = vec!["DPROJ", &len, lc, gc, &d];
                                f.extend(rule_fields(rule));
                                f.push(&c);
                                f
                            }
                        };
                        record(&mut out, &f)?;
                    }
                }
            }
        }
    }
    Ok(())
}

pub fn model_to_string(model: &Model) -> String {
    let mut buf = Vec::new();
    write_model(model, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("labels are UTF-8")
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, model_to_string(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    read_model(&fs::read_to_string(path)?)
}

struct Line<'a> {
    number: usize,
    fields: Vec<&'a str>,
}

impl<'a> Line<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::ModelFormat {
            line: self.number,
            message: message.into(),
        }
    }

    fn count(&self, s: &str) -> Result<u64> {
        s.parse().map_err(|_| self.err(format!("bad count `{s}`")))
    }

    fn arity(&self, min: usize) -> Result<()> {
        if self.fields.len() < min {
            return Err(self.err(format!("expected at least {min} fields")));
        }
        Ok(())
    }

    fn exact(&self, n: usize) -> Result<()> {
        if self.fields.len() != n {
            return Err(self.err(format!("expected {n} fields")));
        }
        Ok(())
    }

    /// Rule spanning fields[from..len-1].
    fn rule(&self, from: usize) -> Rule {
        let f = &self.fields[from..self.fields.len() - 1];
        Rule::new(f[0], f[1..].iter().copied())
    }

    fn last_count(&self) -> Result<u64> {
        self.count(self.fields[self.fields.len() - 1])
    }
}

fn header_value<'a>(line: &Line<'a>, i: usize, key: &str) -> Result<&'a str> {
    line.fields
        .get(i)
        .and_then(|f| f.strip_prefix(key))
        .and_then(|f| f.strip_prefix('='))
        .ok_or_else(|| line.err(format!("missing `{key}=` in header")))
}

pub fn read_model(text: &str) -> Result<Model> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| Line {
            number: i + 1,
            fields: l.split('\t').collect(),
        });
    let header = lines.next().ok_or(Error::ModelFormat {
        line: 1,
        message: "empty model file".into(),
    })?;
    if header.fields[0] != MAGIC {
        return Err(header.err("not a model file"));
    }
    header.exact(5)?;
    if header.fields[1] != VERSION {
        return Err(Error::ModelVersion(header.fields[1].to_string()));
    }
    let start = header_value(&header, 3, "start")?.to_string();
    let binarized = match header_value(&header, 4, "binarized")? {
        "0" => false,
        "1" => true,
        other => return Err(header.err(format!("bad binarized flag `{other}`"))),
    };
    match header.fields[2] {
        "pcfg" => {
            let mut m = PcfgModel::new(start);
            m.binarized = binarized;
            for line in lines {
                match line.fields[0] {
                    "RULE" => {
                        line.arity(4)?;
                        m.add_rule(line.rule(1), line.last_count()?);
                    }
                    other => return Err(line.err(format!("unexpected record `{other}`"))),
                }
            }
            Ok(Model::Pcfg(m))
        }
        "plcg" => {
            let mut m = PlcgModel::new(start);
            m.binarized = binarized;
            let mut att = Vec::new();
            for line in lines {
                match line.fields[0] {
                    "SHIFT" => {
                        line.exact(4)?;
                        let c = line.last_count()?;
                        m.add_shift(line.fields[1], line.fields[2], c);
                    }
                    "ATT" => {
                        line.exact(5)?;
                        if line.fields[1] != line.fields[2] {
                            return Err(
                                line.err("attach record with distinct left corner and goal")
                            );
                        }
                        let a = line.count(line.fields[3])?;
                        let t = line.count(line.fields[4])?;
                        m.add_attach(line.fields[1], a);
                        att.push((line.number, line.fields[1].to_string(), t));
                    }
                    "PROJ" => {
                        line.arity(6)?;
                        let rule = line.rule(3);
                        if rule.left_corner() != line.fields[2] {
                            return Err(line.err("rule does not start with the left corner"));
                        }
                        let c = line.last_count()?;
                        m.bump_proj(line.fields[1], line.fields[2], rule, c);
                    }
                    other => return Err(line.err(format!("unexpected record `{other}`"))),
                }
            }
            m.rebuild_closure();
            for (number, sym, total) in att {
                if m.attach_total(&sym) != total {
                    return Err(Error::ModelFormat {
                        line: number,
                        message: format!(
                            "attach total for `{sym}` disagrees with projection counts"
                        ),
                    });
                }
            }
            Ok(Model::Plcg(m))
        }
        "delta" => {
            let mut m = DeltaModel::new(start);
            m.binarized = binarized;
            for line in lines {
                match line.fields[0] {
                    "SHIFT" => {
                        line.exact(4)?;
                        let c = line.last_count()?;
                        m.add_shift(line.fields[1], line.fields[2], c);
                    }
                    "DATT" => {
                        line.exact(5)?;
                        let len = line.count(line.fields[1])? as usize;
                        let c = line.last_count()?;
                        m.add_choice(len, line.fields[2], line.fields[3], -2, Choice::Attach, c);
                    }
                    "DPROJ" => {
                        line.arity(8)?;
                        let len = line.count(line.fields[1])? as usize;
                        let delta: i32 = line.fields[4]
                            .parse()
                            .map_err(|_| line.err(format!("bad delta `{}`", line.fields[4])))?;
                        let rule = line.rule(5);
                        if rule.left_corner() != line.fields[2] {
                            return Err(line.err("rule does not start with the left corner"));
                        }
                        let c = line.last_count()?;
                        m.add_choice(
                            len,
                            line.fields[2],
                            line.fields[3],
                            delta,
                            Choice::Rule(rule),
                            c,
                        );
                    }
                    other => return Err(line.err(format!("unexpected record `{other}`"))),
                }
            }
            Ok(Model::Delta(m))
        }
        other => Err(header.err(format!("unknown model kind `{other}`"))),
    }
}
