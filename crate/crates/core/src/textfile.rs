//! Shared tokenizer for the plain-text table formats. Splits a file into
//! nonempty token lines, with `#` starting a comment.

pub(crate) struct Syntax {
    pub line: usize,
    pub message: String,
}

pub(crate) struct Lines<'a> {
    // (1-based line number, tokens)
    items: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    pub fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .map(|(i, raw)| {
                let body = raw.split('#').next().unwrap_or("");
                (i + 1, body.split_whitespace().collect::<Vec<_>>())
            })
            .filter(|(_, toks)| !toks.is_empty())
            .collect();
        Lines { items, pos: 0 }
    }

    pub fn next(&mut self) -> Result<(usize, &[&'a str]), Syntax> {
        match self.items.get(self.pos) {
            Some((line, toks)) => {
                self.pos += 1;
                Ok((*line, toks))
            }
            None => Err(Syntax {
                line: self.items.last().map_or(0, |(l, _)| *l),
                message: "unexpected end of file".into(),
            }),
        }
    }

    pub fn keyword(&mut self, word: &str) -> Result<(usize, Vec<&'a str>), Syntax> {
        let (line, toks) = self.next()?;
        if toks[0] != word {
            return Err(Syntax {
                line,
                message: format!("expected {word:?}, found {:?}", toks[0]),
            });
        }
        Ok((line, toks[1..].to_vec()))
    }

    pub fn counted(&mut self, word: &str) -> Result<(usize, usize), Syntax> {
        let (line, rest) = self.keyword(word)?;
        let [value] = rest.as_slice() else {
            return Err(Syntax {
                line,
                message: format!("{word} takes exactly one count"),
            });
        };
        let value = value.parse().map_err(|_| Syntax {
            line,
            message: format!("bad count {value:?}"),
        })?;
        Ok((line, value))
    }

    pub fn rows(&mut self, rows: usize, cols: usize) -> Result<Vec<f64>, Syntax> {
        let mut out = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (line, toks) = self.next()?;
            if toks.len() != cols {
                return Err(Syntax {
                    line,
                    message: format!("expected {cols} numbers, found {}", toks.len()),
                });
            }
            for tok in toks {
                out.push(tok.parse().map_err(|_| Syntax {
                    line,
                    message: format!("bad number {tok:?}"),
                })?);
            }
        }
        Ok(out)
    }
}

/// Append one space-separated row, shortest round-trip float form.
pub(crate) fn push_row(out: &mut String, row: &[f64]) {
    for (i, v) in row.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&format!("{v}"));
    }
    out.push('\n');
}
