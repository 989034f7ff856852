//! The seven benchmark loops, embedded so tests and examples need no files.

/// A shipped benchmark with its target variable and moment count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Benchmark {
    pub name: &'static str,
    pub file: &'static str,
    pub source: &'static str,
    pub var: &'static str,
    pub moments: usize,
}

pub const STUTTERINGP: Benchmark = Benchmark {
    name: "StutteringP",
    file: "stutteringp.pp",
    source: include_str!("../../../corpus/stutteringp.pp"),
    var: "s",
    moments: 2,
};

pub const SQUARE: Benchmark = Benchmark {
    name: "Square",
    file: "square.pp",
    source: include_str!("../../../corpus/square.pp"),
    var: "y",
    moments: 2,
};

pub const BINOMIAL: Benchmark = Benchmark {
    name: "Binomial",
    file: "binomial.pp",
    source: include_str!("../../../corpus/binomial.pp"),
    var: "x",
    moments: 2,
};

pub const RANDOM_WALK_1D: Benchmark = Benchmark {
    name: "RandomWalk1D",
    file: "randomwalk1d.pp",
    source: include_str!("../../../corpus/randomwalk1d.pp"),
    var: "x",
    moments: 2,
};

pub const UNIFORM: Benchmark = Benchmark {
    name: "Uniform",
    file: "uniform.pp",
    source: include_str!("../../../corpus/uniform.pp"),
    var: "u",
    moments: 6,
};

pub const VASICEK: Benchmark = Benchmark {
    name: "Vasicek",
    file: "vasicek.pp",
    source: include_str!("../../../corpus/vasicek.pp"),
    var: "r",
    moments: 2,
};

pub const PDP: Benchmark = Benchmark {
    name: "PDP",
    file: "pdp.pp",
    source: include_str!("../../../corpus/pdp.pp"),
    var: "x",
    moments: 3,
};

pub const ALL: [Benchmark; 7] = [
    STUTTERINGP,
    SQUARE,
    BINOMIAL,
    RANDOM_WALK_1D,
    UNIFORM,
    VASICEK,
    PDP,
];

pub fn by_name(name: &str) -> Option<Benchmark> {
    ALL.iter()
        .copied()
        .find(|b| b.name.eq_ignore_ascii_case(name) || b.file.trim_end_matches(".pp") == name.to_ascii_lowercase())
}
