// SPDX-License-Identifier: Apache-2.0

//! Reader for the line-oriented netlist text format.
//!
//! ```text
//! # full adder
//! name fa
//! inputs a b cin
//! gate t XOR a b
//! gate s XOR t cin
//! gate c1 AND a b
//! gate c2 AND t cin
//! gate co OR c1 c2
//! outputs s co
//! ```
//!
//! Statements may appear in any order; gates are topologically sorted on load.

use std::collections::HashMap;

use super::netlist::{is_identifier, Gate, GateType, NetId, Netlist, Signal};
use crate::error::{Error, Result};

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(Token {
                    text: &line[s..i],
                    column: s + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            text: &line[s..],
            column: s + 1,
        });
    }
    tokens
}

struct RawGate<'a> {
    name: &'a str,
    kind: GateType,
    fanin: Vec<&'a str>,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Parses and validates netlist text.
pub fn parse_netlist(text: &str) -> Result<Netlist> {
    let mut name = String::from("netlist");
    let mut inputs: Vec<&str> = Vec::new();
    let mut outputs: Vec<&str> = Vec::new();
    let mut raw: Vec<RawGate<'_>> = Vec::new();

    for (lineno, full_line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = match full_line.find('#') {
            Some(p) => &full_line[..p],
            None => full_line,
        };
        let tokens = tokenize(line);
        let Some(head) = tokens.first() else {
            continue;
        };
        let check_ids = |toks: &[Token<'_>]| -> Result<()> {
            for t in toks {
                if !is_identifier(t.text) {
                    return Err(syntax(lineno, t.column, format!("invalid identifier `{}`", t.text)));
                }
            }
            Ok(())
        };
        match head.text {
            "name" => {
                let rest = line[head.column - 1 + head.text.len()..].trim();
                if rest.is_empty() {
                    return Err(syntax(lineno, head.column, "`name` requires a value"));
                }
                name = rest.to_string();
            }
            "inputs" => {
                if tokens.len() < 2 {
                    return Err(syntax(lineno, head.column, "`inputs` requires at least one identifier"));
                }
                check_ids(&tokens[1..])?;
                inputs.extend(tokens[1..].iter().map(|t| t.text));
            }
            "outputs" => {
                if tokens.len() < 2 {
                    return Err(syntax(lineno, head.column, "`outputs` requires at least one binding"));
                }
                check_ids(&tokens[1..])?;
                outputs.extend(tokens[1..].iter().map(|t| t.text));
            }
            "gate" => {
                if tokens.len() < 3 {
                    return Err(syntax(lineno, head.column, "expected `gate <id> <TYPE> <fanin>*`"));
                }
                let kind: GateType = tokens[2]
                    .text
                    .parse()
                    .map_err(|e: String| syntax(lineno, tokens[2].column, e))?;
                if tokens.len() > 5 {
                    return Err(syntax(lineno, tokens[5].column, "too many fan-ins"));
                }
                check_ids(&tokens[1..2])?;
                check_ids(&tokens[3..])?;
                raw.push(RawGate {
                    name: tokens[1].text,
                    kind,
                    fanin: tokens[3..].iter().map(|t| t.text).collect(),
                });
            }
            other => {
                return Err(syntax(lineno, head.column, format!("unknown statement `{other}`")));
            }
        }
    }

    if inputs.is_empty() {
        return Err(Error::InvalidNetlist("no `inputs` statement".into()));
    }
    if outputs.is_empty() {
        return Err(Error::InvalidNetlist("no `outputs` statement".into()));
    }

    // Declared identifiers: inputs then gates.
    let mut ids: HashMap<&str, Option<usize>> = HashMap::new();
    for &i in &inputs {
        if i == "CONST0" || i == "CONST1" || ids.insert(i, None).is_some() {
            return Err(Error::DuplicateId(i.to_string()));
        }
    }
    for (gi, g) in raw.iter().enumerate() {
        if g.name == "CONST0" || g.name == "CONST1" || ids.insert(g.name, Some(gi)).is_some() {
            return Err(Error::DuplicateId(g.name.to_string()));
        }
    }
    for g in &raw {
        if g.fanin.len() != g.kind.arity() {
            return Err(Error::Arity {
                gate: g.name.to_string(),
                kind: g.kind.name().into(),
                expected: g.kind.arity(),
                found: g.fanin.len(),
            });
        }
        for f in &g.fanin {
            if !is_const_token(f) && !ids.contains_key(f) {
                return Err(Error::UndefinedNet(f.to_string()));
            }
        }
    }
    for o in &outputs {
        if !is_const_token(o) && !ids.contains_key(o) {
            return Err(Error::UndefinedNet(o.to_string()));
        }
    }

    let order = topo_order(&raw, &ids)?;

    let n_in = inputs.len();
    let mut net_of: HashMap<&str, NetId> = inputs.iter().enumerate().map(|(i, &n)| (n, NetId(i))).collect();
    for (pos, &gi) in order.iter().enumerate() {
        net_of.insert(raw[gi].name, NetId(n_in + pos));
    }
    let resolve = |t: &str| match t {
        "CONST0" => Signal::Const(false),
        "CONST1" => Signal::Const(true),
        _ => Signal::Net(net_of[t]),
    };
    let gates = order
        .iter()
        .map(|&gi| Gate {
            name: raw[gi].name.to_string(),
            kind: raw[gi].kind,
            fanin: raw[gi].fanin.iter().map(|f| resolve(f)).collect(),
        })
        .collect();
    let outputs = outputs.iter().map(|o| resolve(o)).collect();
    Netlist::new(name, inputs.iter().map(|s| s.to_string()).collect(), gates, outputs)
}

fn is_const_token(t: &str) -> bool {
    t == "CONST0" || t == "CONST1"
}

/// Depth-first post-order over gates in declaration order; reports the first cycle found.
fn topo_order(raw: &[RawGate<'_>], ids: &HashMap<&str, Option<usize>>) -> Result<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut mark = vec![Mark::New; raw.len()];
    let mut order = Vec::with_capacity(raw.len());
    for root in 0..raw.len() {
        if mark[root] != Mark::New {
            continue;
        }
        // (gate, next fan-in position)
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::Active;
        while let Some(&mut (g, ref mut pos)) = stack.last_mut() {
            if *pos < raw[g].fanin.len() {
                let f = raw[g].fanin[*pos];
                *pos += 1;
                if let Some(&Some(child)) = ids.get(f) {
                    match mark[child] {
                        Mark::New => {
                            mark[child] = Mark::Active;
                            stack.push((child, 0));
                        }
                        Mark::Active => return Err(Error::Cycle(raw[child].name.to_string())),
                        Mark::Done => {}
                    }
                }
            } else {
                mark[g] = Mark::Done;
                order.push(g);
                stack.pop();
            }
        }
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_and() {
        let n = parse_netlist("inputs a b\ngate g1 AND a b\noutputs g1\n").unwrap();
        assert_eq!(n.n_inputs(), 2);
        assert_eq!(n.gates().len(), 1);
        assert_eq!(n.outputs(), &[Signal::Net(NetId(2))]);
    }

    #[test]
    fn any_statement_order_is_sorted() {
        let text = "outputs o\ngate o OR x y\ngate y AND a b\ngate x NOT a\ninputs a b\n";
        let n = parse_netlist(text).unwrap();
        let names: Vec<_> = n.gates().iter().map(|g| g.name.as_str()).collect();
        assert_eq!(names, ["x", "y", "o"]);
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let err = parse_netlist("inputs a\ngate g AND g a\noutputs g\n").unwrap_err();
        assert!(matches!(err, Error::Cycle(ref g) if g == "g"), "{err}");
    }

    #[test]
    fn longer_cycle() {
        let err = parse_netlist("inputs a\ngate x AND y a\ngate y OR x a\noutputs x\n").unwrap_err();
        assert!(matches!(err, Error::Cycle(_)));
    }

    #[test]
    fn undefined_net() {
        let err = parse_netlist("inputs a\ngate g AND a zz\noutputs g\n").unwrap_err();
        assert!(matches!(err, Error::UndefinedNet(ref n) if n == "zz"));
        let err = parse_netlist("inputs a\noutputs q\n").unwrap_err();
        assert!(matches!(err, Error::UndefinedNet(ref n) if n == "q"));
    }

    #[test]
    fn arity_mismatch() {
        let err = parse_netlist("inputs a b\ngate g NOT a b\noutputs g\n").unwrap_err();
        assert!(matches!(err, Error::Arity { ref gate, expected: 1, found: 2, .. } if gate == "g"));
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_netlist("inputs a b\n  gate g FROB a b\noutputs g\n").unwrap_err();
        match err {
            Error::Syntax { line, column, .. } => assert_eq!((line, column), (2, 10)),
            e => panic!("unexpected {e}"),
        }
        let err = parse_netlist("inputs a\nwire x\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 2, column: 1, .. }));
    }

    #[test]
    fn constants_and_comments() {
        let text =
            "# tied\nname tied one\ninputs a # trailing\ngate z CONST1\ngate g AND a CONST1\noutputs g CONST0 z\n";
        let n = parse_netlist(text).unwrap();
        assert_eq!(n.name(), "tied one");
        assert_eq!(n.outputs()[1], Signal::Const(false));
        assert_eq!(n.gates()[0].kind, GateType::Const1);
    }

    #[test]
    fn duplicate_ids() {
        let err = parse_netlist("inputs a a\noutputs a\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateId(_)));
        let err = parse_netlist("inputs a\ngate a NOT a\noutputs a\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateId(_)));
    }

    #[test]
    fn text_round_trip() {
        let text = "inputs a b c\ngate t XOR a b\ngate s XOR t c\ngate c1 AND a b\ngate c2 AND t c\ngate co OR c1 c2\noutputs s co\n";
        let n = parse_netlist(text).unwrap();
        let again = parse_netlist(&n.to_text()).unwrap();
        assert_eq!(n, again);
    }
}
