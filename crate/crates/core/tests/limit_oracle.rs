//! `c(x)` against a 256-bit evaluation of its defining double limit.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rumour_core::limit_c::{c_of_x, SeriesTerms};
use rumour_core::numeric::DoubleDouble;
use rumour_core::recursions::uninformed_step;

const P: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

fn to_f64(x: &BigFloat, cc: &mut Consts) -> f64 {
    let s = x.format(Radix::Dec, RM, cc).expect("formattable");
    s.parse().unwrap_or_else(|_| panic!("unparsable {s}"))
}

/// `-x - a + b + ln g^(b)(1 - 2^{-a-x})`, iterating `g` directly.
fn c_direct(x: f64, a: u32, b: u32, cc: &mut Consts) -> f64 {
    let one = BigFloat::from_f64(1.0, P);
    let bx = BigFloat::from_f64(x, P);
    let ln2 = cc.ln_2(P, RM);
    let eps = bx
        .add(&BigFloat::from_f64(a as f64, P), P, RM)
        .mul(&ln2, P, RM)
        .neg()
        .exp(P, RM, cc);
    let mut v = one.sub(&eps, P, RM);
    for _ in 0..b {
        let e = v.sub(&one, P, RM).exp(P, RM, cc);
        v = v.mul(&e, P, RM);
    }
    let shift = BigFloat::from_f64(b as f64 - a as f64, P).sub(&bx, P, RM);
    to_f64(&v.ln(P, RM, cc).add(&shift, P, RM), cc)
}

#[test]
fn c_matches_big_float_definition() {
    let mut cc = Consts::new().expect("constants cache");
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut xs = vec![0.5];
    xs.extend((0..10).map(|_| rng.gen_range(0.0..1.0)));
    for x in xs {
        // outer truncation error is O(2^-a); inner error O(e^-(b - a))
        let oracle = c_direct(x, 42, 150, &mut cc);
        let ours = c_of_x(x, 1e-12).unwrap().value;
        assert!((ours - oracle).abs() < 1e-10, "x = {x}: {ours} vs {oracle}");
    }
}

#[test]
fn telescoped_series_equals_direct_iteration() {
    let (x, a, b) = (0.3, 8u32, 40usize);
    let eps = (-(DoubleDouble::from_f64(x) + DoubleDouble::from_f64(a as f64)) * DoubleDouble::LN2).exp();
    let y = DoubleDouble::ONE - eps;
    let mut v = y;
    for _ in 0..b {
        v = uninformed_step(v);
    }
    let direct = DoubleDouble::from_f64(b as f64) + v.ln();
    let mut series = DoubleDouble::ONE + (-eps).ln1p() - eps;
    for t in SeriesTerms::<DoubleDouble>::new(x, a).take(b - 1) {
        series += t;
    }
    assert!((direct - series).abs().to_f64() < 1e-26, "{direct:?} vs {series:?}");
}
