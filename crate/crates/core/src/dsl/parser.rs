use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::ParseError;

pub fn parse(src: &str) -> Result<Scenario, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let mut stmts = Vec::new();
    while p.peek() != &Tok::Eof {
        stmts.push(p.stmt()?);
    }
    Ok(Scenario { stmts })
}

/// Parse a single expression, used by `nsx eval` and the tests.
pub fn parse_expr(src: &str) -> Result<Ast, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if p.peek() != &Tok::Eof {
        return Err(p.error("end of expression"));
    }
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_ident(&self) -> Option<&str> {
        match self.peek() {
            Tok::Ident(s) => Some(s),
            _ => None,
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        let t = &self.toks[self.pos];
        let found = if t.tok == Tok::Eof { t.tok.describe() } else { t.text.clone() };
        ParseError { line: t.line, column: t.column, message: format!("expected {expected}"), token: found }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.error(&format!("`{}`", t.symbol())))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        self.peek_ident() == Some(kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error(&format!("`{kw}`")))
        }
    }

    fn name(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(what)),
        }
    }

    fn int(&mut self, what: &str) -> PResult<u64> {
        match self.peek() {
            Tok::Int(n) => {
                let n = *n;
                self.bump();
                Ok(n)
            }
            _ => Err(self.error(what)),
        }
    }

    fn small_int(&mut self, what: &str) -> PResult<u32> {
        let at = self.pos;
        let n = self.int(what)?;
        u32::try_from(n).map_err(|_| {
            self.pos = at;
            self.error(&format!("{what} below 2^32"))
        })
    }

    fn string(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Tok::Str(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(what)),
        }
    }

    /// `( item, item, ... )` with at least one item.
    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        self.expect(Tok::LParen)?;
        let mut out = vec![item(self)?];
        while self.eat(&Tok::Comma) {
            out.push(item(self)?);
        }
        self.expect(Tok::RParen)?;
        Ok(out)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let Some(kw) = self.peek_ident().map(str::to_owned) else {
            return Err(self.error("a statement keyword"));
        };
        match kw.as_str() {
            "scenario" => {
                self.bump();
                let id = self.name("a scenario id")?;
                let title = self.string("a quoted scenario title")?;
                Ok(Stmt::Scenario { id, title })
            }
            "chart" => {
                self.bump();
                let name = self.name("a chart name")?;
                let coords = self.list(|p| p.name("a coordinate name"))?;
                Ok(Stmt::Chart { name, coords })
            }
            "param" => {
                self.bump();
                let name = self.name("a parameter name")?;
                self.expect(Tok::Eq)?;
                Ok(Stmt::Param { name, value: self.expr()? })
            }
            "expr" | "form" => {
                self.bump();
                let name = self.name("a name")?;
                self.kw("on")?;
                let chart = self.name("a chart name")?;
                self.expect(Tok::Eq)?;
                let body = self.expr()?;
                Ok(if kw == "expr" { Stmt::Expr { name, chart, body } } else { Stmt::Form { name, chart, body } })
            }
            "vfield" => {
                self.bump();
                let name = self.name("a vector field name")?;
                self.kw("on")?;
                let chart = self.name("a chart name")?;
                self.expect(Tok::Eq)?;
                let comps = self.list(Self::expr)?;
                Ok(Stmt::VField { name, chart, comps })
            }
            "map" => {
                self.bump();
                let name = self.name("a map name")?;
                self.expect(Tok::Colon)?;
                let source = self.name("a source chart")?;
                self.expect(Tok::Arrow)?;
                let target = self.name("a target chart")?;
                self.expect(Tok::Eq)?;
                let comps = self.list(Self::expr)?;
                Ok(Stmt::Map { name, source, target, comps })
            }
            "metric" => {
                self.bump();
                let name = self.name("a metric name")?;
                self.kw("on")?;
                let chart = self.name("a chart name")?;
                self.expect(Tok::Eq)?;
                let spec = if self.eat_kw("euclidean") {
                    MetricSpec::Euclidean
                } else if self.eat_kw("diag") {
                    MetricSpec::Diag(self.list(Self::expr)?)
                } else if self.peek() == &Tok::LParen {
                    MetricSpec::Matrix(self.list(|p| p.list(Self::expr))?)
                } else {
                    return Err(self.error("`euclidean`, `diag(...)` or a matrix of rows"));
                };
                Ok(Stmt::Metric { name, chart, spec })
            }
            "region" => {
                self.bump();
                let name = self.name("a region name")?;
                self.kw("on")?;
                let chart = self.name("a chart name")?;
                let axes = self.list(Self::axis)?;
                let random = if self.eat_kw("random") { self.small_int("a random sample count")? } else { 0 };
                let via = if self.eat_kw("via") { Some(self.name("a map name")?) } else { None };
                Ok(Stmt::Region { name, chart, axes, random, via })
            }
            "locus" => {
                self.bump();
                let name = self.name("a locus name")?;
                self.expect(Tok::Eq)?;
                Ok(Stmt::Locus { name, spec: self.locus()? })
            }
            "check" => {
                self.bump();
                Ok(Stmt::Check(self.check()?))
            }
            _ => Err(self.error("a statement keyword")),
        }
    }

    fn axis(&mut self) -> PResult<AxisSpec> {
        let coord = self.name("a coordinate name")?;
        self.expect(Tok::Colon)?;
        let lo = self.expr()?;
        self.expect(Tok::DotDot)?;
        let hi = self.expr()?;
        let grid = if self.eat_kw("grid") {
            Some(self.small_int("a grid size")?)
        } else if self.eat_kw("rand") {
            None
        } else {
            return Err(self.error("`grid N` or `rand`"));
        };
        Ok(AxisSpec { coord, lo, hi, grid })
    }

    fn locus(&mut self) -> PResult<LocusAst> {
        if self.eat(&Tok::LBrace) {
            let mut eqs = Vec::new();
            if !self.eat(&Tok::RBrace) {
                loop {
                    let c = self.name("a coordinate name")?;
                    self.expect(Tok::Eq)?;
                    eqs.push((c, self.expr()?));
                    if self.eat(&Tok::RBrace) {
                        break;
                    }
                    self.expect(Tok::Comma)?;
                }
            }
            return Ok(LocusAst::Coords(eqs));
        }
        if self.eat_kw("image") {
            self.expect(Tok::LParen)?;
            let map = self.name("a map name")?;
            self.expect(Tok::Comma)?;
            let region = self.name("a region name")?;
            self.expect(Tok::RParen)?;
            return Ok(LocusAst::Image { map, region });
        }
        if self.eat_kw("union") {
            return Ok(LocusAst::Union(self.list(|p| p.name("a locus name"))?));
        }
        if self.eat_kw("empty") {
            return Ok(LocusAst::Empty);
        }
        Err(self.error("`{...}`, `image(...)`, `union(...)` or `empty`"))
    }

    fn loc_in(&mut self) -> PResult<(String, String)> {
        self.kw("on")?;
        let locus = self.name("a locus name")?;
        self.kw("in")?;
        let region = self.name("a region name")?;
        Ok((locus, region))
    }

    fn ranks(&mut self) -> PResult<(u32, u32)> {
        self.kw("singular")?;
        let singular = self.small_int("a rank")?;
        self.kw("regular")?;
        let regular = self.small_int("a rank")?;
        Ok((singular, regular))
    }

    fn check(&mut self) -> PResult<Check> {
        let kind_name = self.name("a check kind")?;
        let kind = match kind_name.as_str() {
            "closed" => CheckKind::Closed(self.expr()?),
            "rank_at" | "gradient_rank_at" => {
                let form = self.expr()?;
                self.kw("at")?;
                let at = self.list(Self::expr)?;
                self.expect(Tok::Eq)?;
                let rank = self.small_int("a rank")?;
                if kind_name == "rank_at" {
                    CheckKind::RankAt { form, at, rank }
                } else {
                    CheckKind::GradientRankAt { form, at, rank }
                }
            }
            "nearsympl_at" => {
                let form = self.expr()?;
                let at = if self.eat_kw("at") {
                    Target::Point(self.list(Self::expr)?)
                } else if self.eat_kw("on") {
                    Target::Region(self.name("a region name")?)
                } else {
                    return Err(self.error("`at (...)` or `on REGION`"));
                };
                CheckKind::NearSymplAt { form, at }
            }
            "contact" => {
                let form = self.expr()?;
                let via = if self.eat_kw("via") { Some(self.name("a map name")?) } else { None };
                let region = if self.eat_kw("on") { Some(self.name("a region name")?) } else { None };
                CheckKind::Contact { form, via, region }
            }
            "vanishing_locus" => {
                let form = self.expr()?;
                let (locus, region) = self.loc_in()?;
                self.kw("off")?;
                let off = match self.peek_ident() {
                    Some("nonzero") => OffReq::Nonzero,
                    Some("positive") => OffReq::Positive,
                    Some("negative") => OffReq::Negative,
                    Some("waived") => OffReq::Waived,
                    _ => return Err(self.error("`nonzero`, `positive`, `negative` or `waived`")),
                };
                self.bump();
                CheckKind::VanishingLocus { form, locus, region, off }
            }
            "rank_locus" => {
                let form = self.expr()?;
                let (locus, region) = self.loc_in()?;
                let (singular, regular) = self.ranks()?;
                CheckKind::RankLocus { form, locus, region, singular, regular }
            }
            "rank_drop_locus" => {
                let map = self.name("a map name")?;
                let (locus, region) = self.loc_in()?;
                let (singular, regular) = self.ranks()?;
                CheckKind::RankDropLocus { map, locus, region, singular, regular }
            }
            "fixed_points" => {
                let field = self.name("a vector field name")?;
                let (locus, region) = self.loc_in()?;
                CheckKind::FixedPoints { field, locus, region }
            }
            "dividing_set" => {
                let form = self.expr()?;
                self.kw("along")?;
                let field = self.name("a vector field name")?;
                let (locus, region) = self.loc_in()?;
                let equals = if self.eat_kw("equals") {
                    let e = self.expr()?;
                    let factor = if self.eat_kw("times") { Some(self.expr()?) } else { None };
                    Some((e, factor))
                } else {
                    None
                };
                CheckKind::DividingSet { form, field, locus, region, equals }
            }
            "pullback_eq" => {
                let map = self.name("a map name")?;
                let form = self.expr()?;
                self.expect(Tok::Eq)?;
                CheckKind::PullbackEq { map, form, rhs: self.expr()? }
            }
            "equal" => {
                let lhs = self.expr()?;
                self.expect(Tok::Eq)?;
                CheckKind::Equal { lhs, rhs: self.expr()? }
            }
            "proportional" => {
                let lhs = self.expr()?;
                self.expect(Tok::Eq)?;
                let rhs = self.expr()?;
                self.kw("times")?;
                CheckKind::Proportional { lhs, rhs, factor: self.expr()? }
            }
            "bracket_table" => {
                let h = self.expr()?;
                self.kw("dim")?;
                let dim = self.small_int("a dimension")?;
                let natural = self.eat_kw("natural");
                CheckKind::BracketTable { h, dim, natural }
            }
            "stabilize" => {
                let eta = self.expr()?;
                self.kw("base")?;
                let base = self.expr()?;
                self.kw("on")?;
                let region = self.name("a region name")?;
                self.kw("kmax")?;
                let kmax = self.int("a maximal constant")?;
                let top_positive = self.eat_kw("top_positive");
                CheckKind::Stabilize { eta, base, region, kmax, top_positive }
            }
            "invariant" => {
                let name = self.name("an invariant name")?;
                self.kw("count")?;
                CheckKind::Invariant { name, count: self.small_int("an instance count")? }
            }
            "show" => CheckKind::Show(self.expr()?),
            _ => {
                self.pos -= 1;
                return Err(self.error("a check kind"));
            }
        };
        let mut with = Vec::new();
        if self.eat_kw("with") {
            loop {
                let n = self.name("a parameter name")?;
                self.expect(Tok::Eq)?;
                with.push((n, self.expr()?));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        let expect = if self.eat_kw("expect") {
            let e = match self.peek_ident() {
                Some("pass") => Expect::Pass,
                Some("fail") => Expect::Fail,
                Some("report") => Expect::Report,
                _ => return Err(self.error("`pass`, `fail` or `report`")),
            };
            self.bump();
            Some(e)
        } else {
            None
        };
        let note = if self.eat_kw("note") { Some(self.string("a quoted note")?) } else { None };
        Ok(Check { kind, with, expect, note })
    }

    pub fn expr(&mut self) -> PResult<Ast> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(&Tok::Minus) {
                lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> PResult<Ast> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(&Tok::Star) {
                lhs = Ast::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(&Tok::Slash) {
                lhs = Ast::Div(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(&Tok::Wedge) {
                lhs = Ast::Wedge(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> PResult<Ast> {
        if self.eat(&Tok::Minus) {
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        let mut base = self.primary()?;
        while self.eat(&Tok::Caret) {
            base = Ast::Pow(Box::new(base), self.small_int("an integer exponent")?);
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<Ast> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Ast::Int(n))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if self.peek() != &Tok::LParen {
                    return Ok(Ast::Ident(name));
                }
                if let Some(field) = name.strip_prefix("i_").filter(|f| !f.is_empty()) {
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Ast::Interior(field.to_owned(), Box::new(arg)));
                }
                let args = self.list(Self::expr)?;
                Ok(Ast::Call(name, args))
            }
            _ => Err(self.error("an expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let s = parse("chart C3 (z1,z2,z3)\nform a on C3 = d(z3) + z1*d(z2)\ncheck contact a expect pass").unwrap();
        assert_eq!(s.stmts.len(), 3);
        assert_eq!(s.checks().count(), 1);
    }

    #[test]
    fn unicode_synonyms() {
        let a = parse_expr("d(x1) ∧ d(x2) + ι_X(w) − ∗(g, w)").unwrap();
        let b = parse_expr("d(x1) /\\ d(x2) + i_X(w) - star(g, w)").unwrap();
        assert_eq!(a, b);
        assert_eq!(parse_expr("a wedge b").unwrap(), parse_expr("a /\\ b").unwrap());
        assert_eq!(parse_expr("2*π").unwrap(), parse_expr("2*pi").unwrap());
    }

    #[test]
    fn precedence() {
        let e = parse_expr("-x^2 + a*b/c").unwrap();
        let x2 = Ast::Pow(Box::new(Ast::ident("x")), 2);
        let abc = Ast::Div(
            Box::new(Ast::Mul(Box::new(Ast::ident("a")), Box::new(Ast::ident("b")))),
            Box::new(Ast::ident("c")),
        );
        assert_eq!(e, Ast::Add(Box::new(Ast::Neg(Box::new(x2))), Box::new(abc)));
    }

    #[test]
    fn unclosed_paren_is_positioned() {
        let e = parse("chart C (x)\nform w on C = d(x\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("`)`"), "{e}");
        let e = parse("chart C (x)\ncheck bogus w").unwrap_err();
        assert_eq!((e.line, e.column), (2, 7));
        assert_eq!(e.token, "bogus");
    }

    #[test]
    fn comments_and_opaque() {
        let s = parse("# header\nexpr f on C = chi'(t1) # trailing\n").unwrap();
        match &s.stmts[0] {
            Stmt::Expr { body, .. } => assert_eq!(body, &Ast::Call("chi'".into(), vec![Ast::ident("t1")])),
            other => panic!("{other:?}"),
        }
    }
}
