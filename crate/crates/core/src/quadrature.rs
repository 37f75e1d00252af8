//! Globally adaptive Gauss–Kronrod (7/15) integration.

use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
    pub max_intervals: usize,
}

impl<T: Real> Tolerance<T> {
    pub fn new(abs: T, rel: T) -> Self {
        Self {
            abs,
            rel,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: T,
    pub converged: bool,
    pub evaluations: usize,
}

#[derive(Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn gk15<T: Real>(f: &mut impl FnMut(T) -> T, a: T, b: T) -> Segment<T> {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let radius = half * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for i in 0..7 {
        let dx = radius * T::lit(XGK[i]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * T::lit(WGK[i]);
        if i % 2 == 1 {
            gauss = gauss + pair * T::lit(WG[i / 2]);
        }
    }
    Segment {
        a,
        b,
        value: kronrod * radius,
        error: ((kronrod - gauss) * radius).abs(),
    }
}

/// Integrate `f` over `[a, b]` until the summed error estimate is below
/// `max(tol.abs, tol.rel * |I|)`.
pub fn integrate<T: Real>(mut f: impl FnMut(T) -> T, a: T, b: T, tol: Tolerance<T>) -> QuadResult<T> {
    integrate_with_breaks(&mut f, &[a, b], tol)
}

/// As [`integrate`], starting from the subdivision given by `points`
/// (sorted, first and last are the limits). Zero-length pieces are skipped.
pub fn integrate_with_breaks<T: Real>(f: &mut impl FnMut(T) -> T, points: &[T], tol: Tolerance<T>) -> QuadResult<T> {
    let mut segments: Vec<Segment<T>> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk15(f, w[0], w[1]))
        .collect();
    let mut evaluations = 15 * segments.len();
    loop {
        let value = segments.iter().fold(T::zero(), |s, g| s + g.value);
        let error = segments.iter().fold(T::zero(), |s, g| s + g.error);
        let target = tol.abs.max(tol.rel * value.abs());
        if error <= target || segments.is_empty() {
            return QuadResult {
                value,
                error,
                converged: true,
                evaluations,
            };
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (i, s)| if s.error > best.1 { (i, s.error) } else { best });
        let s = segments[worst];
        let mid = T::lit(0.5) * (s.a + s.b);
        if segments.len() >= tol.max_intervals || !(mid > s.a && mid < s.b) {
            return QuadResult {
                value,
                error,
                converged: false,
                evaluations,
            };
        }
        segments[worst] = gk15(f, s.a, mid);
        segments.push(gk15(f, mid, s.b));
        evaluations += 30;
    }
}
