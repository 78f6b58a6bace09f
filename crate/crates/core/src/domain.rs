//! Exact membership in the reality (quasi-Hermiticity) domain, the closed
//! form spectra of the small chains, and boundary tracing.

use nalgebra::Complex;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{char_poly_of_spec, secular_in_s, ChainSpec, Family, TridiagonalMatrix};
use crate::error::{usage, Error, Result};
use crate::exactpoly::rational::to_f64;
use crate::exactpoly::rational::ratio;
use crate::exactpoly::{isolate_real_roots, rat, sign_at, sturm_count, Endpoint, RealRoot, Rational, UniPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictClass {
    /// All energies real and pairwise distinct.
    RealSimple,
    /// All energies real with at least one coincidence (exceptional point).
    RealDegenerate,
    /// Some energy is non-real.
    Complex,
}

impl VerdictClass {
    pub fn in_closure(self) -> bool {
        self != VerdictClass::Complex
    }
}

/// Outcome of [`classify_point`].
#[derive(Clone, Debug, PartialEq)]
pub struct MembershipVerdict {
    pub class: VerdictClass,
    /// Distinct real roots of the squarefree certificate in `[0, inf)` for the
    /// symmetrized family (in `s`), on the whole line otherwise (in `E`).
    pub real_root_count: usize,
    /// The exact polynomial the verdict was derived from.
    pub certificate: UniPoly,
}

/// Exact classification of a chain's spectrum.
///
/// For the symmetrized family the monic secular polynomial in `s = E^2` is
/// used: every root must be real and non-negative, and an `s`-root at zero
/// or a repeated `s`-root is a degeneracy. The permanent `E = 0` level of
/// odd dimensions is not a degeneracy by itself. Other families are
/// classified from the characteristic polynomial in `E` directly.
pub fn classify_point(spec: &ChainSpec) -> MembershipVerdict {
    match spec.family() {
        Family::Symmetrized => {
            let form = secular_in_s(spec).expect("symmetrized chains always reduce to s");
            classify_s_poly(&form.s_poly)
        }
        _ => classify_e_poly(&char_poly_of_spec(spec)),
    }
}

pub(crate) fn classify_s_poly(s_poly: &UniPoly) -> MembershipVerdict {
    let d = s_poly.degree().unwrap_or(0);
    let sf = s_poly.squarefree_part().expect("secular polynomial is monic");
    let distinct = sf.degree().unwrap_or(0);
    let count = |lo: Endpoint, hi: Endpoint| sturm_count(&sf, &lo, &hi).expect("squarefree by construction");
    let zero_root = s_poly.coeff(0).is_zero();
    let total_real = count(Endpoint::NegInfinity, Endpoint::PosInfinity);
    let positive = count(Endpoint::At(rat(0)), Endpoint::PosInfinity);
    let nonnegative = positive + usize::from(zero_root);
    let class = if total_real < distinct || nonnegative < distinct {
        VerdictClass::Complex
    } else if distinct < d || zero_root {
        VerdictClass::RealDegenerate
    } else {
        VerdictClass::RealSimple
    };
    MembershipVerdict { class, real_root_count: nonnegative, certificate: s_poly.clone() }
}

pub(crate) fn classify_e_poly(e_poly: &UniPoly) -> MembershipVerdict {
    let d = e_poly.degree().unwrap_or(0);
    let sf = e_poly.squarefree_part().expect("characteristic polynomial is nonzero");
    let distinct = sf.degree().unwrap_or(0);
    let real = sturm_count(&sf, &Endpoint::NegInfinity, &Endpoint::PosInfinity).expect("squarefree by construction");
    let class = if real < distinct {
        VerdictClass::Complex
    } else if distinct < d {
        VerdictClass::RealDegenerate
    } else {
        VerdictClass::RealSimple
    };
    MembershipVerdict { class, real_root_count: real, certificate: e_poly.clone() }
}

/// One inequality of a closed-form reality criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub label: String,
    pub holds: bool,
    pub saturated: bool,
}

/// Spectrum and membership from the explicit small-dimension formulas.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedForm {
    pub n: usize,
    /// Energies sorted by real part, then imaginary part.
    pub energies: Vec<Complex<f64>>,
    pub inequalities: Vec<Inequality>,
    pub in_closure: bool,
    pub degenerate: bool,
}

fn ineq(label: &str, lhs_minus_rhs: &Rational) -> Inequality {
    Inequality { label: label.to_string(), holds: !lhs_minus_rhs.is_negative(), saturated: lhs_minus_rhs.is_zero() }
}

fn csqrt(x: f64) -> Complex<f64> {
    Complex::new(x, 0.0).sqrt()
}

fn pm_sqrt(s: Complex<f64>) -> [Complex<f64>; 2] {
    let r = s.sqrt();
    [r, -r]
}

/// Closed-form spectra for `N` in `2..=5` of the symmetrized family, with
/// squared couplings given central first. Membership booleans are exact.
pub fn closed_form_check(n: usize, squared_central_first: &[Rational]) -> Result<ClosedForm> {
    if !(2..=5).contains(&n) {
        return usage(format!("closed forms exist for N in 2..=5, not {n}"));
    }
    if squared_central_first.len() != n / 2 {
        return usage(format!("N = {n} needs {} squared couplings", n / 2));
    }
    let a = &squared_central_first[0];
    let af = to_f64(a);
    let mut energies: Vec<Complex<f64>>;
    let inequalities: Vec<Inequality>;
    match n {
        2 => {
            energies = pm_sqrt(Complex::new(1.0 - af, 0.0)).to_vec();
            inequalities = vec![ineq("1 >= A", &(rat(1) - a))];
        }
        3 => {
            energies = vec![Complex::new(0.0, 0.0)];
            energies.extend(pm_sqrt(Complex::new(4.0 - 2.0 * af, 0.0)));
            inequalities = vec![ineq("2 >= A", &(rat(2) - a))];
        }
        4 => {
            let b = &squared_central_first[1];
            let bf = to_f64(b);
            let root = csqrt(64.0 - 64.0 * bf + 16.0 * af + 4.0 * bf * af + af * af);
            let centre = Complex::new(5.0 - bf - af / 2.0, 0.0);
            energies = Vec::new();
            for s in [centre + root / 2.0, centre - root / 2.0] {
                energies.extend(pm_sqrt(s));
            }
            let radicand = rat(64) - rat(64) * b + rat(16) * a + rat(4) * b * a + a * a;
            let sum = rat(10) - rat(2) * b - a;
            inequalities = vec![
                ineq("64 - 64B + 16A + 4AB + A^2 >= 0", &radicand),
                ineq("10 - 2B - A >= 0", &sum),
                ineq("(10 - 2B - A)^2 >= 64 - 64B + 16A + 4AB + A^2", &(&sum * &sum - &radicand)),
            ];
        }
        5 => {
            let b = &squared_central_first[1];
            let bf = to_f64(b);
            let inner = csqrt(36.0 + 12.0 * af + af * af - 36.0 * bf);
            let base = Complex::new(10.0 - af - bf, 0.0);
            energies = vec![Complex::new(0.0, 0.0)];
            energies.extend(pm_sqrt(base - inner));
            energies.extend(pm_sqrt(base + inner));
            inequalities = vec![
                ineq("10 >= A + B", &(rat(10) - a - b)),
                ineq("36 + 12A + A^2 >= 36B", &(rat(36) + rat(12) * a + a * a - rat(36) * b)),
                ineq("(8 + B)^2 >= (32 - 2B) A", &((rat(8) + b) * (rat(8) + b) - (rat(32) - rat(2) * b) * a)),
            ];
        }
        _ => unreachable!(),
    }
    energies.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let in_closure = inequalities.iter().all(|q| q.holds);
    let degenerate = in_closure && inequalities.iter().any(|q| q.saturated);
    Ok(ClosedForm { n, energies, inequalities, in_closure, degenerate })
}

/// Entry of a general tridiagonal matrix used as a plane coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntrySlot {
    Diag(usize),
    Super(usize),
    Sub(usize),
}

/// Parameter plane (or line) in which a boundary is traced.
#[derive(Clone, Debug, PartialEq)]
pub enum PlaneModel {
    /// Symmetrized chain; `axes` are central-first coupling indices (0 = a)
    /// and `fixed_squared` holds all squared couplings central first (the
    /// entries on the axes are ignored). Coordinates are coupling values and
    /// windows must be non-negative (only squares matter).
    Symmetrized { n: usize, axes: Vec<usize>, fixed_squared: Vec<Rational> },
    /// General tridiagonal matrix with the chosen entries as coordinates.
    General { base: TridiagonalMatrix, axes: Vec<EntrySlot> },
}

impl PlaneModel {
    fn dims(&self) -> usize {
        match self {
            PlaneModel::Symmetrized { axes, .. } => axes.len(),
            PlaneModel::General { axes, .. } => axes.len(),
        }
    }

    /// Symmetrized coordinates are traced in squared space, where only
    /// squares enter and straight rays stay exact.
    fn squared_space(&self) -> bool {
        matches!(self, PlaneModel::Symmetrized { .. })
    }

    pub fn axis_labels(&self) -> Vec<String> {
        match self {
            PlaneModel::Symmetrized { axes, .. } => axes
                .iter()
                .map(|&i| if i < 26 { ((b'a' + i as u8) as char).to_string() } else { format!("v{}", i + 1) })
                .collect(),
            PlaneModel::General { axes, .. } => axes
                .iter()
                .map(|s| match s {
                    EntrySlot::Diag(i) => format!("d{i}"),
                    EntrySlot::Super(i) => format!("super{i}"),
                    EntrySlot::Sub(i) => format!("sub{i}"),
                })
                .collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            PlaneModel::Symmetrized { n, axes, fixed_squared } => {
                if *n < 2 || fixed_squared.len() != n / 2 {
                    return usage(format!("symmetrized plane needs N >= 2 and {} squared couplings", n / 2));
                }
                if axes.iter().any(|&i| i >= n / 2) {
                    return usage("axis index beyond the coupling count");
                }
            }
            PlaneModel::General { base, axes } => {
                let n = base.dim();
                for s in axes {
                    let ok = match *s {
                        EntrySlot::Diag(i) => i < n,
                        EntrySlot::Super(i) | EntrySlot::Sub(i) => i + 1 < n,
                    };
                    if !ok {
                        return usage(format!("entry {s:?} outside a {n}x{n} matrix"));
                    }
                }
            }
        }
        if !(1..=2).contains(&self.dims()) {
            return usage("boundary tracing needs one or two axes");
        }
        Ok(())
    }

    /// Builds the chain at internal coordinates (squared for symmetrized).
    fn spec_at(&self, coords: &[Rational]) -> ChainSpec {
        match self {
            PlaneModel::Symmetrized { n, axes, fixed_squared } => {
                let mut sq = fixed_squared.clone();
                for (&i, c) in axes.iter().zip(coords) {
                    sq[i] = c.clone();
                }
                ChainSpec::symmetrized_squared(*n, sq).expect("validated plane")
            }
            PlaneModel::General { base, axes } => {
                let mut t = base.clone();
                for (s, c) in axes.iter().zip(coords) {
                    match *s {
                        EntrySlot::Diag(i) => t.diag[i] = c.clone(),
                        EntrySlot::Super(i) => t.sup[i] = c.clone(),
                        EntrySlot::Sub(i) => t.sub[i] = c.clone(),
                    }
                }
                ChainSpec::general_tridiagonal(t).expect("validated plane")
            }
        }
    }

    fn inside(&self, coords: &[Rational]) -> bool {
        classify_point(&self.spec_at(coords)).class.in_closure()
    }

    /// Internal coordinates to plane coordinates.
    fn to_plane(&self, coords: &[Rational]) -> Vec<f64> {
        coords.iter().map(|c| if self.squared_space() { to_f64(c).max(0.0).sqrt() } else { to_f64(c) }).collect()
    }
}

#[derive(Clone, Debug)]
pub struct TraceOptions {
    /// `(lo, hi)` per axis, in plane coordinates.
    pub window: Vec<(Rational, Rational)>,
    /// Number of rays (2-D) and probes per ray.
    pub resolution: usize,
    /// Bisection stops when the bracket is this narrow in every coordinate.
    pub tolerance: f64,
    /// Locally maximise the boundary distance around spikes.
    pub refine_spikes: bool,
}

impl TraceOptions {
    pub fn new(window: Vec<(Rational, Rational)>, resolution: usize) -> Self {
        TraceOptions { window, resolution, tolerance: 1e-9, refine_spikes: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    /// Bracket midpoint in plane coordinates.
    pub coords: Vec<f64>,
    /// Probe inside the closure of the domain.
    pub inside: Vec<f64>,
    /// Probe outside the closure of the domain.
    pub outside: Vec<f64>,
    /// Ray parameter along the window's far edge (0 for 1-D traces).
    pub ray: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryCurve {
    pub n: usize,
    pub axis_labels: Vec<String>,
    pub window: Vec<(Rational, Rational)>,
    pub resolution: usize,
    pub tolerance: f64,
    pub points: Vec<BoundaryPoint>,
    /// Set when the window produced no crossing.
    pub diagnostic: Option<String>,
}

struct Ray {
    param: Rational,
    anchor: Vec<Rational>,
    target: Vec<Rational>,
}

impl Ray {
    fn at(&self, u: &Rational) -> Vec<Rational> {
        self.anchor.iter().zip(&self.target).map(|(a, t)| a + (t - a) * u).collect()
    }
}

fn internal(model: &PlaneModel, x: &Rational) -> Rational {
    if model.squared_space() {
        x * x
    } else {
        x.clone()
    }
}

fn ray_for(model: &PlaneModel, window: &[(Rational, Rational)], w: &Rational) -> Ray {
    let lo: Vec<Rational> = window.iter().map(|(l, _)| internal(model, l)).collect();
    let hi: Vec<Rational> = window.iter().map(|(_, h)| internal(model, h)).collect();
    if lo.len() == 1 {
        return Ray { param: w.clone(), anchor: lo, target: hi };
    }
    // w in [0, 1]: along the top edge; w in [1, 2]: down the right edge.
    let target = if *w <= rat(1) {
        vec![&lo[0] + (&hi[0] - &lo[0]) * w, hi[1].clone()]
    } else {
        vec![hi[0].clone(), &hi[1] - (&hi[1] - &lo[1]) * (w - rat(1))]
    };
    Ray { param: w.clone(), anchor: lo, target }
}

fn bracket_width(model: &PlaneModel, a: &[Rational], b: &[Rational]) -> f64 {
    model.to_plane(a).iter().zip(model.to_plane(b)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Bisects between `u_in` (inside) and `u_out` (outside) along `ray`.
fn bisect(model: &PlaneModel, ray: &Ray, mut u_in: Rational, mut u_out: Rational, tol: f64) -> Result<BoundaryPoint> {
    let mut guard = 0;
    while bracket_width(model, &ray.at(&u_in), &ray.at(&u_out)) > tol {
        let mid = (&u_in + &u_out) / rat(2);
        if model.inside(&ray.at(&mid)) {
            u_in = mid;
        } else {
            u_out = mid;
        }
        guard += 1;
        if guard > 400 {
            return Err(Error::NotConverged("boundary bisection exceeded 400 halvings".into()));
        }
    }
    let pin = ray.at(&u_in);
    let pout = ray.at(&u_out);
    if model.inside(&pin) == model.inside(&pout) {
        return Err(Error::Consistency("emitted boundary point does not bracket a verdict change".into()));
    }
    let inside = model.to_plane(&pin);
    let outside = model.to_plane(&pout);
    let coords = inside.iter().zip(&outside).map(|(a, b)| (a + b) / 2.0).collect();
    Ok(BoundaryPoint { coords, inside, outside, ray: to_f64(&ray.param) })
}

struct RayTrace {
    points: Vec<BoundaryPoint>,
    /// Plane distance from the anchor to the first crossing, if the ray
    /// starts inside.
    first_exit: Option<f64>,
    saw_inside: bool,
    saw_outside: bool,
}

/// Polynomial in the ray parameter whose real roots are the only places
/// where the verdict can change along `ray`: the discriminant of the
/// secular polynomial (a double root) times its constant term (an `s`-root
/// at zero) for symmetrized chains, the discriminant of the characteristic
/// polynomial otherwise. Recovered exactly by interpolation; the degree
/// bounds follow from the weights of the coefficients.
fn critical_poly(model: &PlaneModel, ray: &Ray) -> UniPoly {
    let (bound, symmetrized) = match model {
        PlaneModel::Symmetrized { n, .. } => {
            let d = n / 2;
            (d * d.saturating_sub(1) + d, true)
        }
        PlaneModel::General { base, .. } => {
            let n = base.dim();
            (n * (n - 1), false)
        }
    };
    let nodes = bound.max(1) + 1;
    let us: Vec<Rational> = (0..nodes).map(|k| Rational::new((k as i64).into(), ((nodes - 1) as i64).into())).collect();
    let mut disc = Vec::with_capacity(nodes);
    let mut p0 = Vec::with_capacity(nodes);
    for u in &us {
        let spec = model.spec_at(&ray.at(u));
        if symmetrized {
            let sp = secular_in_s(&spec).expect("symmetrized chains always reduce to s").s_poly;
            disc.push(sp.discriminant());
            p0.push(sp.coeff(0));
        } else {
            disc.push(char_poly_of_spec(&spec).discriminant());
        }
    }
    let d = UniPoly::interpolate("u", &us, &disc);
    if symmetrized {
        &d * &UniPoly::interpolate("u", &us, &p0)
    } else {
        d
    }
}

/// Bisects the single simple root of `p` between `u_in` (inside) and
/// `u_out` (outside) by sign changes of `p`, falling back to verdict
/// bisection when the endpoints do not show a sign change.
fn bisect_root(model: &PlaneModel, ray: &Ray, p: &UniPoly, u_in: Rational, u_out: Rational, tol: f64) -> Result<BoundaryPoint> {
    let in_is_lo = u_in < u_out;
    let (mut lo, mut hi) = if in_is_lo { (u_in.clone(), u_out.clone()) } else { (u_out.clone(), u_in.clone()) };
    let s_lo = sign_at(p, &lo);
    if s_lo == 0 || s_lo == sign_at(p, &hi) {
        return bisect(model, ray, u_in, u_out, tol);
    }
    let mut guard = 0;
    while bracket_width(model, &ray.at(&lo), &ray.at(&hi)) > tol {
        let mid = (&lo + &hi) / rat(2);
        match sign_at(p, &mid) {
            0 => {
                let mut h = (&hi - &lo) / rat(4);
                while bracket_width(model, &ray.at(&(&mid - &h)), &ray.at(&(&mid + &h))) > tol {
                    h /= rat(2);
                }
                lo = &mid - &h;
                hi = &mid + &h;
                break;
            }
            s if s == s_lo => lo = mid,
            _ => hi = mid,
        }
        guard += 1;
        if guard > 4000 {
            return Err(Error::NotConverged("boundary root refinement exceeded 4000 halvings".into()));
        }
    }
    let (u_in, u_out) = if in_is_lo { (lo, hi) } else { (hi, lo) };
    let pin = ray.at(&u_in);
    let pout = ray.at(&u_out);
    if !model.inside(&pin) || model.inside(&pout) {
        return Err(Error::Consistency("emitted boundary point does not bracket a verdict change".into()));
    }
    let inside = model.to_plane(&pin);
    let outside = model.to_plane(&pout);
    let coords = inside.iter().zip(&outside).map(|(a, b)| (a + b) / 2.0).collect();
    Ok(BoundaryPoint { coords, inside, outside, ray: to_f64(&ray.param) })
}

/// Finds every verdict change along `ray` for `u` in `[0, 1]`: the real
/// roots of the critical polynomial split the ray into cells of constant
/// verdict, one classification per cell decides where crossings are.
fn trace_ray(model: &PlaneModel, ray: &Ray, probes: usize, tol: f64) -> Result<RayTrace> {
    let crit = critical_poly(model, ray);
    if crit.is_zero() {
        return trace_ray_probed(model, ray, probes, tol);
    }
    let sqf = crit.squarefree_part()?;
    let (zero, one) = (rat(0), rat(1));
    let width = Rational::new(1.into(), BigInt::from(10).pow(40));
    let roots = if sqf.degree().unwrap_or(0) > 0 { isolate_real_roots(&sqf, &width)? } else { Vec::new() };
    let kept: Vec<&RealRoot> = roots.iter().filter(|r| r.lo > zero && r.hi < one).collect();
    let mut samples: Vec<Rational> = Vec::with_capacity(kept.len() + 2);
    samples.push(if sign_at(&sqf, &zero) != 0 {
        zero.clone()
    } else {
        kept.first().map_or(ratio(1, 2), |r| &r.lo / rat(2))
    });
    for w in kept.windows(2) {
        samples.push((&w[0].hi + &w[1].lo) / rat(2));
    }
    let last = if sign_at(&sqf, &one) != 0 {
        one.clone()
    } else {
        kept.last().map_or(ratio(1, 2), |r| (&r.hi + &one) / rat(2))
    };
    if samples.last() != Some(&last) {
        samples.push(last);
    }
    let verdicts: Vec<bool> = samples.iter().map(|u| model.inside(&ray.at(u))).collect();
    let anchor_plane = model.to_plane(&ray.anchor);
    let mut points = Vec::new();
    let mut first_exit = None;
    for j in 0..samples.len() - 1 {
        if verdicts[j] == verdicts[j + 1] {
            continue;
        }
        let (u_in, u_out) =
            if verdicts[j] { (samples[j].clone(), samples[j + 1].clone()) } else { (samples[j + 1].clone(), samples[j].clone()) };
        let p = bisect_root(model, ray, &sqf, u_in, u_out, tol)?;
        if first_exit.is_none() && verdicts[0] && verdicts[j] {
            let d = p.coords.iter().zip(&anchor_plane).map(|(x, a)| (x - a).powi(2)).sum::<f64>().sqrt();
            first_exit = Some(d);
        }
        points.push(p);
    }
    Ok(RayTrace {
        points,
        first_exit,
        saw_inside: verdicts.iter().any(|&v| v),
        saw_outside: verdicts.iter().any(|&v| !v),
    })
}

/// Fallback when the critical polynomial vanishes identically along a ray:
/// classify `probes` equally spaced points and bisect each change.
fn trace_ray_probed(model: &PlaneModel, ray: &Ray, probes: usize, tol: f64) -> Result<RayTrace> {
    let probes = probes.max(2);
    let us: Vec<Rational> = (0..probes).map(|j| Rational::new((j as i64).into(), ((probes - 1) as i64).into())).collect();
    let verdicts: Vec<bool> = us.iter().map(|u| model.inside(&ray.at(u))).collect();
    let mut points = Vec::new();
    let mut first_exit = None;
    let anchor_plane = model.to_plane(&ray.anchor);
    for j in 0..probes - 1 {
        if verdicts[j] == verdicts[j + 1] {
            continue;
        }
        let (u_in, u_out) = if verdicts[j] { (us[j].clone(), us[j + 1].clone()) } else { (us[j + 1].clone(), us[j].clone()) };
        let p = bisect(model, ray, u_in, u_out, tol)?;
        if first_exit.is_none() && verdicts[0] && verdicts[j] {
            let d = p.coords.iter().zip(&anchor_plane).map(|(x, a)| (x - a).powi(2)).sum::<f64>().sqrt();
            first_exit = Some(d);
        }
        points.push(p);
    }
    Ok(RayTrace {
        points,
        first_exit,
        saw_inside: verdicts.iter().any(|&v| v),
        saw_outside: verdicts.iter().any(|&v| !v),
    })
}

/// Traces the boundary of the reality domain inside a window.
///
/// Rays start at the window's lower corner and end on its far edges (a
/// single ray across the interval in 1-D); `resolution` is the number of
/// rays. Along each ray the verdict is constant between the real roots of
/// an exact critical polynomial, so every crossing is found and then
/// bisected on exact rational coordinates. With `refine_spikes`, local maxima of the first
/// crossing distance are sharpened by golden-section search over the ray
/// direction, which follows thin spikes of the domain to their tips.
pub fn trace_boundary(model: &PlaneModel, opts: &TraceOptions) -> Result<BoundaryCurve> {
    model.validate()?;
    if opts.window.len() != model.dims() {
        return usage(format!("window has {} axes, plane has {}", opts.window.len(), model.dims()));
    }
    if opts.resolution < 2 {
        return usage("resolution must be at least 2");
    }
    if !(opts.tolerance > 0.0) {
        return usage("tolerance must be positive");
    }
    for (lo, hi) in &opts.window {
        if lo >= hi {
            return usage("window bounds must satisfy lo < hi");
        }
        if model.squared_space() && lo.is_negative() {
            return usage("symmetrized windows must be non-negative; the domain is mirror symmetric");
        }
    }
    let n = match model {
        PlaneModel::Symmetrized { n, .. } => *n,
        PlaneModel::General { base, .. } => base.dim(),
    };
    let r = opts.resolution;
    let params: Vec<Rational> = if model.dims() == 1 {
        vec![rat(0)]
    } else {
        (0..r).map(|i| Rational::new((2 * i as i64).into(), ((r - 1) as i64).into())).collect()
    };
    let traces: Vec<Result<RayTrace>> = params
        .par_iter()
        .map(|w| trace_ray(model, &ray_for(model, &opts.window, w), r, opts.tolerance))
        .collect();
    let traces: Vec<RayTrace> = traces.into_iter().collect::<Result<_>>()?;

    let mut points: Vec<BoundaryPoint> = Vec::new();
    for t in &traces {
        points.extend(t.points.iter().cloned());
    }

    if opts.refine_spikes && model.dims() == 2 {
        let exits: Vec<Option<f64>> = traces.iter().map(|t| t.first_exit).collect();
        let mut peaks = Vec::new();
        for i in 1..params.len().saturating_sub(1) {
            if let (Some(l), Some(c), Some(rr)) = (exits[i - 1], exits[i], exits[i + 1]) {
                if c > l && c >= rr {
                    peaks.push(i);
                }
            }
        }
        let refined: Vec<Result<Vec<BoundaryPoint>>> = peaks
            .par_iter()
            .map(|&i| refine_peak(model, opts, &params[i - 1], &params[i + 1], r))
            .collect();
        for pts in refined {
            points.extend(pts?);
        }
    }
    points.sort_by(|a, b| a.ray.total_cmp(&b.ray).then_with(|| {
        let da: f64 = a.coords.iter().map(|x| x * x).sum();
        let db: f64 = b.coords.iter().map(|x| x * x).sum();
        da.total_cmp(&db)
    }));

    let diagnostic = if points.is_empty() {
        let any_inside = traces.iter().any(|t| t.saw_inside);
        let any_outside = traces.iter().any(|t| t.saw_outside);
        Some(match (any_inside, any_outside) {
            (true, false) => "window lies entirely inside the closure of the domain".to_string(),
            (false, true) => "window lies entirely outside the domain".to_string(),
            _ => "no verdict change resolved at this resolution".to_string(),
        })
    } else {
        None
    };
    Ok(BoundaryCurve {
        n,
        axis_labels: model.axis_labels(),
        window: opts.window.clone(),
        resolution: r,
        tolerance: opts.tolerance,
        points,
        diagnostic,
    })
}

/// Rounds a ray parameter to a multiple of `2^-60`. Any rational gives an
/// exact ray; this only keeps denominators from compounding.
fn snap(x: Rational) -> Rational {
    let scale = BigInt::one() << 60u32;
    let scaled = x * Rational::from_integer(scale.clone());
    Rational::new(scaled.round().to_integer(), scale)
}

/// Golden-section search for the ray direction with the farthest first
/// crossing between two neighbouring ray parameters.
fn refine_peak(model: &PlaneModel, opts: &TraceOptions, lo: &Rational, hi: &Rational, probes: usize) -> Result<Vec<BoundaryPoint>> {
    let mut out = Vec::new();
    let eval = |w: &Rational, out: &mut Vec<BoundaryPoint>| -> Result<f64> {
        let t = trace_ray(model, &ray_for(model, &opts.window, w), probes, opts.tolerance)?;
        let d = t.first_exit.unwrap_or(0.0);
        if let Some(p) = t.points.into_iter().next() {
            out.push(p);
        }
        Ok(d)
    };
    // 0.381966... approximated by a fixed rational keeps probes exact.
    let g = Rational::new(381966i64.into(), 1000000i64.into());
    let (mut a, mut b) = (lo.clone(), hi.clone());
    let mut c = snap(&a + (&b - &a) * &g);
    let mut d = snap(&b - (&b - &a) * &g);
    let mut fc = eval(&c, &mut out)?;
    let mut fd = eval(&d, &mut out)?;
    for _ in 0..120 {
        if to_f64(&(&b - &a)) < 1e-16 {
            break;
        }
        if fc >= fd {
            b = d.clone();
        } else {
            a = c.clone();
        }
        // The rational stand-in for the golden ratio lets the reused point
        // drift; re-place both points once it strays.
        let span = &b - &a;
        let (ci, di) = (snap(&a + &span * &g), snap(&b - &span * &g));
        let slack = to_f64(&span) * 0.05;
        let (reuse_c, reuse_d) = if fc >= fd { (false, true) } else { (true, false) };
        let reused = if fc >= fd { (c.clone(), fc) } else { (d.clone(), fd) };
        let (c_new, d_new) = (ci.clone(), di.clone());
        if reuse_d && (to_f64(&(&reused.0 - &di)).abs() <= slack) {
            d = reused.0;
            fd = reused.1;
            c = c_new;
            fc = eval(&c, &mut out)?;
        } else if reuse_c && (to_f64(&(&reused.0 - &ci)).abs() <= slack) {
            c = reused.0;
            fc = reused.1;
            d = d_new;
            fd = eval(&d, &mut out)?;
        } else {
            c = c_new;
            d = d_new;
            fc = eval(&c, &mut out)?;
            fd = eval(&d, &mut out)?;
        }
    }
    Ok(out)
}

/// Convenience: verdict of a symmetrized chain from squared couplings listed
/// central first.
pub fn classify_squared(n: usize, squared_central_first: &[Rational]) -> Result<MembershipVerdict> {
    Ok(classify_point(&ChainSpec::symmetrized_squared(n, squared_central_first.to_vec())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::ratio;

    #[test]
    fn three_level_outside_interval() {
        let v = classify_point(&ChainSpec::symmetrized(3, vec![ratio(3, 2)]).unwrap());
        assert_eq!(v.class, VerdictClass::Complex);
    }

    #[test]
    fn four_level_eep_is_degenerate() {
        let v = classify_squared(4, &[rat(4), rat(3)]).unwrap();
        assert_eq!(v.class, VerdictClass::RealDegenerate);
    }

    #[test]
    fn five_level_origin_is_simple() {
        let v = classify_squared(5, &[rat(0), rat(0)]).unwrap();
        assert_eq!(v.class, VerdictClass::RealSimple);
        assert_eq!(v.real_root_count, 2);
    }

    #[test]
    fn general_two_by_two_classification() {
        let m = |b: i64| TridiagonalMatrix::new(vec![rat(1), rat(3)], vec![rat(1)], vec![rat(b)]).unwrap();
        let c = |b| classify_point(&ChainSpec::general_tridiagonal(m(b)).unwrap()).class;
        assert_eq!(c(0), VerdictClass::RealSimple);
        assert_eq!(c(-1), VerdictClass::RealDegenerate);
        assert_eq!(c(-2), VerdictClass::Complex);
    }

    #[test]
    fn odd_dimension_zero_level_alone_is_not_degenerate() {
        let v = classify_squared(3, &[rat(1)]).unwrap();
        assert_eq!(v.class, VerdictClass::RealSimple);
        assert_eq!(classify_squared(3, &[rat(2)]).unwrap().class, VerdictClass::RealDegenerate);
    }

    #[test]
    fn closed_form_four_level_origin() {
        let c = closed_form_check(4, &[rat(0), rat(0)]).unwrap();
        let re: Vec<f64> = c.energies.iter().map(|e| e.re).collect();
        assert_eq!(re, vec![-3.0, -1.0, 1.0, 3.0]);
        assert!(c.in_closure && !c.degenerate);
    }

    #[test]
    fn closed_form_four_level_eep_radicand_vanishes() {
        let c = closed_form_check(4, &[rat(4), rat(3)]).unwrap();
        assert!(c.inequalities[0].saturated);
        assert!(c.energies.iter().all(|e| e.norm() < 1e-12));
        assert!(c.degenerate);
    }

    #[test]
    fn closed_form_five_level_eep_saturates_all_three() {
        let c = closed_form_check(5, &[rat(6), rat(4)]).unwrap();
        assert!(c.inequalities.iter().all(|q| q.holds && q.saturated));
        assert!(c.energies.iter().all(|e| e.norm() < 1e-12));
    }

    #[test]
    fn closed_form_rejects_other_dimensions() {
        assert!(closed_form_check(6, &vec![rat(0); 3]).is_err());
    }

    #[test]
    fn three_level_boundary_on_a_line() {
        let model = PlaneModel::Symmetrized { n: 3, axes: vec![0], fixed_squared: vec![rat(0)] };
        let curve = trace_boundary(&model, &TraceOptions::new(vec![(rat(0), ratio(5, 2))], 16)).unwrap();
        assert_eq!(curve.points.len(), 1);
        assert!((curve.points[0].coords[0] - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn window_inside_domain_yields_diagnostic() {
        let model = PlaneModel::Symmetrized { n: 4, axes: vec![0, 1], fixed_squared: vec![rat(0), rat(0)] };
        let curve = trace_boundary(&model, &TraceOptions::new(vec![(rat(0), ratio(1, 10)), (rat(0), ratio(1, 10))], 5)).unwrap();
        assert!(curve.points.is_empty());
        assert!(curve.diagnostic.unwrap().contains("inside"));
    }
}
