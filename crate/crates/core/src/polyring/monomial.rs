use std::cmp::Ordering;
use std::fmt;

/// Exponent vector `(i_1, ..., i_n)` with its cached total degree.
///
/// Ordered graded-lexicographically: first by total degree, then by the
/// exponent vectors compared left to right (so `i_1` is most significant).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    exps: Vec<u32>,
    order: u32,
}

impl MultiIndex {
    pub fn new(exps: Vec<u32>) -> Self {
        let order = exps.iter().sum();
        MultiIndex { exps, order }
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex { exps: vec![0; n], order: 0 }
    }

    /// The unit vector `e_i`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut exps = vec![0; n];
        exps[i] = 1;
        MultiIndex { exps, order: 1 }
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn get(&self, i: usize) -> u32 {
        self.exps[i]
    }

    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.len(), other.len());
        MultiIndex {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
            order: self.order + other.order,
        }
    }

    pub fn plus_unit(&self, i: usize) -> MultiIndex {
        let mut exps = self.exps.clone();
        exps[i] += 1;
        MultiIndex { exps, order: self.order + 1 }
    }

    /// `self - e_i`, or `None` when `i_i = 0`.
    pub fn minus_unit(&self, i: usize) -> Option<MultiIndex> {
        if self.exps[i] == 0 {
            return None;
        }
        let mut exps = self.exps.clone();
        exps[i] -= 1;
        Some(MultiIndex { exps, order: self.order - 1 })
    }

    /// `i_1! * ... * i_n!`, as a big integer.
    pub fn factorial(&self) -> num_bigint::BigInt {
        let mut acc = num_bigint::BigInt::from(1u32);
        for &e in &self.exps {
            for j in 2..=e {
                acc *= j;
            }
        }
        acc
    }

    /// Compact label such as `210` (or `2_1_0` when some exponent exceeds 9).
    pub fn label(&self) -> String {
        if self.exps.iter().all(|&e| e < 10) {
            self.exps.iter().map(|e| e.to_string()).collect()
        } else {
            self.exps.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("_")
        }
    }

    #[inline]
    pub(crate) fn check(&self) -> bool {
        self.exps.iter().sum::<u32>() == self.order
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order
            .cmp(&other.order)
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.exps)
    }
}

/// All multi-indices in `n` variables of total degree at most `d`, in
/// ascending graded-lex order. There are `binom(n+d, d)` of them.
pub fn multi_indices(n: usize, d: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for order in 0..=d {
        let mut cur = vec![0u32; n];
        collect_of_order(&mut cur, 0, order, &mut out);
    }
    out
}

/// Multi-indices of one exact order, ascending lexicographically.
pub fn multi_indices_of_order(n: usize, order: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    collect_of_order(&mut cur, 0, order, &mut out);
    out
}

fn collect_of_order(cur: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    let n = cur.len();
    if n == 0 {
        if remaining == 0 {
            out.push(MultiIndex::new(Vec::new()));
        }
        return;
    }
    if pos == n - 1 {
        cur[pos] = remaining;
        out.push(MultiIndex::new(cur.clone()));
        cur[pos] = 0;
        return;
    }
    for e in 0..=remaining {
        cur[pos] = e;
        collect_of_order(cur, pos + 1, remaining - e, out);
    }
    cur[pos] = 0;
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}
