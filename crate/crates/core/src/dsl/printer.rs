//! Canonical printer. Whitespace is fixed and parentheses are minimal, so
//! printing is a function of the tree alone.

use std::fmt::{self, Write};

use super::ast::*;

impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ast::Int(n) => write!(f, "{n}"),
            Ast::Ident(s) => f.write_str(s),
            Ast::Neg(a) => {
                f.write_str("-")?;
                child(f, a, a.precedence() < 3)
            }
            Ast::Add(a, b) => binary(f, a, " + ", b, 1),
            Ast::Sub(a, b) => binary(f, a, " - ", b, 1),
            Ast::Mul(a, b) => binary(f, a, "*", b, 2),
            Ast::Div(a, b) => binary(f, a, "/", b, 2),
            Ast::Wedge(a, b) => binary(f, a, " /\\ ", b, 2),
            Ast::Pow(a, n) => {
                child(f, a, a.precedence() < 5)?;
                write!(f, "^{n}")
            }
            Ast::Call(name, args) => {
                write!(f, "{name}(")?;
                comma_list(f, args)?;
                f.write_str(")")
            }
            Ast::Interior(x, a) => write!(f, "i_{x}({a})"),
        }
    }
}

fn child(f: &mut fmt::Formatter<'_>, a: &Ast, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({a})")
    } else {
        write!(f, "{a}")
    }
}

/// Left-associative: the right operand needs parentheses at equal precedence.
fn binary(f: &mut fmt::Formatter<'_>, a: &Ast, op: &str, b: &Ast, level: u8) -> fmt::Result {
    child(f, a, a.precedence() < level)?;
    f.write_str(op)?;
    child(f, b, b.precedence() <= level)
}

fn comma_list<T: fmt::Display>(f: &mut impl Write, items: &[T]) -> fmt::Result {
    for (i, a) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

fn tuple<T: fmt::Display>(items: &[T]) -> String {
    let mut s = String::from("(");
    comma_list(&mut s, items).unwrap();
    s.push(')');
    s
}

impl fmt::Display for AxisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} .. {}", self.coord, self.lo, self.hi)?;
        match self.grid {
            Some(n) => write!(f, " grid {n}"),
            None => f.write_str(" rand"),
        }
    }
}

impl fmt::Display for LocusAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocusAst::Coords(eqs) => {
                let parts: Vec<String> = eqs.iter().map(|(c, e)| format!("{c} = {e}")).collect();
                write!(f, "{{{}}}", parts.join(", "))
            }
            LocusAst::Image { map, region } => write!(f, "image({map}, {region})"),
            LocusAst::Union(names) => write!(f, "union{}", tuple(names)),
            LocusAst::Empty => f.write_str("empty"),
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        match self {
            CheckKind::Closed(e) | CheckKind::Show(e) => write!(f, " {e}"),
            CheckKind::RankAt { form, at, rank } | CheckKind::GradientRankAt { form, at, rank } => {
                write!(f, " {form} at {} = {rank}", tuple(at))
            }
            CheckKind::NearSymplAt { form, at } => match at {
                Target::Point(p) => write!(f, " {form} at {}", tuple(p)),
                Target::Region(r) => write!(f, " {form} on {r}"),
            },
            CheckKind::Contact { form, via, region } => {
                write!(f, " {form}")?;
                if let Some(m) = via {
                    write!(f, " via {m}")?;
                }
                if let Some(r) = region {
                    write!(f, " on {r}")?;
                }
                Ok(())
            }
            CheckKind::VanishingLocus { form, locus, region, off } => {
                write!(f, " {form} on {locus} in {region} off {}", off.keyword())
            }
            CheckKind::RankLocus { form, locus, region, singular, regular } => {
                write!(f, " {form} on {locus} in {region} singular {singular} regular {regular}")
            }
            CheckKind::RankDropLocus { map, locus, region, singular, regular } => {
                write!(f, " {map} on {locus} in {region} singular {singular} regular {regular}")
            }
            CheckKind::FixedPoints { field, locus, region } => write!(f, " {field} on {locus} in {region}"),
            CheckKind::DividingSet { form, field, locus, region, equals } => {
                write!(f, " {form} along {field} on {locus} in {region}")?;
                if let Some((e, factor)) = equals {
                    write!(f, " equals {e}")?;
                    if let Some(k) = factor {
                        write!(f, " times {k}")?;
                    }
                }
                Ok(())
            }
            CheckKind::PullbackEq { map, form, rhs } => write!(f, " {map} {form} = {rhs}"),
            CheckKind::Equal { lhs, rhs } => write!(f, " {lhs} = {rhs}"),
            CheckKind::Proportional { lhs, rhs, factor } => write!(f, " {lhs} = {rhs} times {factor}"),
            CheckKind::BracketTable { h, dim, natural } => {
                write!(f, " {h} dim {dim}{}", if *natural { " natural" } else { "" })
            }
            CheckKind::Stabilize { eta, base, region, kmax, top_positive } => {
                write!(f, " {eta} base {base} on {region} kmax {kmax}")?;
                if *top_positive {
                    f.write_str(" top_positive")?;
                }
                Ok(())
            }
            CheckKind::Invariant { name, count } => write!(f, " {name} count {count}"),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "check {}", self.kind)?;
        if !self.with.is_empty() {
            let parts: Vec<String> = self.with.iter().map(|(n, e)| format!("{n} = {e}")).collect();
            write!(f, " with {}", parts.join(", "))?;
        }
        if let Some(e) = self.expect {
            write!(f, " expect {}", e.keyword())?;
        }
        if let Some(n) = &self.note {
            write!(f, " note \"{n}\"")?;
        }
        Ok(())
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Scenario { id, title } => write!(f, "scenario {id} \"{title}\""),
            Stmt::Chart { name, coords } => write!(f, "chart {name} {}", tuple(coords)),
            Stmt::Param { name, value } => write!(f, "param {name} = {value}"),
            Stmt::Expr { name, chart, body } => write!(f, "expr {name} on {chart} = {body}"),
            Stmt::Form { name, chart, body } => write!(f, "form {name} on {chart} = {body}"),
            Stmt::VField { name, chart, comps } => write!(f, "vfield {name} on {chart} = {}", tuple(comps)),
            Stmt::Map { name, source, target, comps } => {
                write!(f, "map {name} : {source} -> {target} = {}", tuple(comps))
            }
            Stmt::Metric { name, chart, spec } => {
                write!(f, "metric {name} on {chart} = ")?;
                match spec {
                    MetricSpec::Euclidean => f.write_str("euclidean"),
                    MetricSpec::Diag(d) => write!(f, "diag{}", tuple(d)),
                    MetricSpec::Matrix(rows) => {
                        let rows: Vec<String> = rows.iter().map(|r| tuple(r)).collect();
                        write!(f, "{}", tuple(&rows))
                    }
                }
            }
            Stmt::Region { name, chart, axes, random, via } => {
                write!(f, "region {name} on {chart} {}", tuple(axes))?;
                if *random > 0 {
                    write!(f, " random {random}")?;
                }
                if let Some(m) = via {
                    write!(f, " via {m}")?;
                }
                Ok(())
            }
            Stmt::Locus { name, spec } => write!(f, "locus {name} = {spec}"),
            Stmt::Check(c) => write!(f, "{c}"),
        }
    }
}

/// One statement per line; the empty scenario prints as the empty string.
pub fn print(s: &Scenario) -> String {
    let mut out = String::new();
    for st in &s.stmts {
        writeln!(out, "{st}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::parser::{parse, parse_expr};
    use super::*;

    #[test]
    fn minimal_parentheses() {
        for src in
            ["-(a + b)", "(-x)^2", "a - (b - c)", "a/(b*c)", "(x^2)^3", "-x^2", "a*-b", "--x", "i_X(d(f)) /\\ d(g)"]
        {
            let e = parse_expr(src).unwrap();
            assert_eq!(e.to_string(), src);
        }
        assert_eq!(parse_expr("((a))+(b*c)").unwrap().to_string(), "a + b*c");
    }

    #[test]
    fn empty_scenario() {
        assert_eq!(print(&Scenario::default()), "");
        assert_eq!(parse("").unwrap(), Scenario::default());
    }

    #[test]
    fn statements_round_trip() {
        let src = "scenario S0 \"demo\"\n\
                   chart C (x, y)\n\
                   param K = 1/2\n\
                   metric g on C = ((1, 0), (0, 2))\n\
                   region R on C (x: -1 .. 1 grid 4, y: 0 .. pi rand) random 3\n\
                   locus L = {x = 0}\n\
                   locus U = union(L, L)\n\
                   check vanishing_locus d(x) /\\ d(y) on L in R off positive with K = 2 expect fail note \"n\"\n";
        let s = parse(src).unwrap();
        assert_eq!(print(&s), src);
        assert_eq!(parse(&print(&s)).unwrap(), s);
    }
}
