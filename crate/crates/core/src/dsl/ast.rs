//! Syntax tree of a scenario document. Nodes carry no positions so that
//! `parse(print(s)) == s` holds structurally.

/// Scalar and form expressions share one grammar; types are resolved
/// during elaboration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ast {
    Int(u64),
    Ident(String),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Wedge(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, u32),
    /// `name(args)`, including `d`, `exp`, `pullback`, `star` and opaque
    /// atoms such as `chi'(t1)`.
    Call(String, Vec<Ast>),
    /// `i_X(form)`.
    Interior(String, Box<Ast>),
}

impl Ast {
    pub fn ident(s: &str) -> Ast {
        Ast::Ident(s.into())
    }

    /// Binding strength used by the parser and the printer.
    pub fn precedence(&self) -> u8 {
        match self {
            Ast::Add(..) | Ast::Sub(..) => 1,
            Ast::Mul(..) | Ast::Div(..) | Ast::Wedge(..) => 2,
            Ast::Neg(_) => 3,
            Ast::Pow(..) => 4,
            Ast::Int(_) | Ast::Ident(_) | Ast::Call(..) | Ast::Interior(..) => 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MetricSpec {
    Euclidean,
    Diag(Vec<Ast>),
    Matrix(Vec<Vec<Ast>>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxisSpec {
    pub coord: String,
    pub lo: Ast,
    pub hi: Ast,
    /// `None` draws the axis at random.
    pub grid: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocusAst {
    Coords(Vec<(String, Ast)>),
    Image { map: String, region: String },
    Union(Vec<String>),
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    Pass,
    Fail,
    Report,
}

impl Expect {
    pub fn keyword(self) -> &'static str {
        match self {
            Expect::Pass => "pass",
            Expect::Fail => "fail",
            Expect::Report => "report",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OffReq {
    Nonzero,
    Positive,
    Negative,
    Waived,
}

impl OffReq {
    pub fn keyword(self) -> &'static str {
        match self {
            OffReq::Nonzero => "nonzero",
            OffReq::Positive => "positive",
            OffReq::Negative => "negative",
            OffReq::Waived => "waived",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckKind {
    Closed(Ast),
    RankAt { form: Ast, at: Vec<Ast>, rank: u32 },
    GradientRankAt { form: Ast, at: Vec<Ast>, rank: u32 },
    NearSymplAt { form: Ast, at: Target },
    Contact { form: Ast, via: Option<String>, region: Option<String> },
    VanishingLocus { form: Ast, locus: String, region: String, off: OffReq },
    RankLocus { form: Ast, locus: String, region: String, singular: u32, regular: u32 },
    RankDropLocus { map: String, locus: String, region: String, singular: u32, regular: u32 },
    FixedPoints { field: String, locus: String, region: String },
    DividingSet { form: Ast, field: String, locus: String, region: String, equals: Option<(Ast, Option<Ast>)> },
    PullbackEq { map: String, form: Ast, rhs: Ast },
    Equal { lhs: Ast, rhs: Ast },
    Proportional { lhs: Ast, rhs: Ast, factor: Ast },
    BracketTable { h: Ast, dim: u32, natural: bool },
    Stabilize { eta: Ast, base: Ast, region: String, kmax: u64, top_positive: bool },
    Invariant { name: String, count: u32 },
    Show(Ast),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    Point(Vec<Ast>),
    Region(String),
}

impl CheckKind {
    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Closed(_) => "closed",
            CheckKind::RankAt { .. } => "rank_at",
            CheckKind::GradientRankAt { .. } => "gradient_rank_at",
            CheckKind::NearSymplAt { .. } => "nearsympl_at",
            CheckKind::Contact { .. } => "contact",
            CheckKind::VanishingLocus { .. } => "vanishing_locus",
            CheckKind::RankLocus { .. } => "rank_locus",
            CheckKind::RankDropLocus { .. } => "rank_drop_locus",
            CheckKind::FixedPoints { .. } => "fixed_points",
            CheckKind::DividingSet { .. } => "dividing_set",
            CheckKind::PullbackEq { .. } => "pullback_eq",
            CheckKind::Equal { .. } => "equal",
            CheckKind::Proportional { .. } => "proportional",
            CheckKind::BracketTable { .. } => "bracket_table",
            CheckKind::Stabilize { .. } => "stabilize",
            CheckKind::Invariant { .. } => "invariant",
            CheckKind::Show(_) => "show",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub kind: CheckKind,
    /// Parameter overrides for this check only.
    pub with: Vec<(String, Ast)>,
    pub expect: Option<Expect>,
    pub note: Option<String>,
}

impl Check {
    pub fn expected(&self) -> Expect {
        self.expect.unwrap_or(Expect::Pass)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Scenario { id: String, title: String },
    Chart { name: String, coords: Vec<String> },
    Param { name: String, value: Ast },
    Expr { name: String, chart: String, body: Ast },
    Form { name: String, chart: String, body: Ast },
    VField { name: String, chart: String, comps: Vec<Ast> },
    Map { name: String, source: String, target: String, comps: Vec<Ast> },
    Metric { name: String, chart: String, spec: MetricSpec },
    Region { name: String, chart: String, axes: Vec<AxisSpec>, random: u32, via: Option<String> },
    Locus { name: String, spec: LocusAst },
    Check(Check),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Scenario {
    pub stmts: Vec<Stmt>,
}

impl Scenario {
    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        self.stmts.iter().filter_map(|s| match s {
            Stmt::Check(c) => Some(c),
            _ => None,
        })
    }

    pub fn header(&self) -> Option<(&str, &str)> {
        self.stmts.iter().find_map(|s| match s {
            Stmt::Scenario { id, title } => Some((id.as_str(), title.as_str())),
            _ => None,
        })
    }
}
