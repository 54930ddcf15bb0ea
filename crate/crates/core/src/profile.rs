//! The one-block profile: the potential `T`, its roots, the singular
//! arclength integral `rho0(xi)`, its limits and its inverse `xi0(rho)`.
//!
//! The block metric is `(1/xi^2) (3/T(xi) dxi^2 + dtheta^2)` on `(xi01, xi02) x R`
//! with `T(xi) = -xi^(8/3) + C xi^2 - 3 eps`. Arclength along `dtheta = 0` is
//! `rho0(xi) = -int_{xi00}^{xi} sqrt(3 / (tau^2 T(tau))) dtau`, which has an
//! inverse-square-root singularity at every finite root of `T`.
//!
//! Internally a point of the block is located by a *smooth parameter*: inside a
//! window next to a finite root `r` we use `t = sqrt(|xi - r|)`, elsewhere
//! `u = ln xi`. In these parameters the arclength density is smooth and
//! bounded away from zero, so both quadrature and inversion are well
//! conditioned all the way to the roots.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::hermite::{HermiteNode, QuinticHermite};
use crate::numeric::quadrature::{self, QuadOptions};
use crate::numeric::roots::safeguarded_newton;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Sign of the sectional curvature of the ambient space form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum SpaceFormSign {
    Hyperbolic,
    Flat,
    Spherical,
}

impl SpaceFormSign {
    pub const ALL: [SpaceFormSign; 3] = [SpaceFormSign::Hyperbolic, SpaceFormSign::Flat, SpaceFormSign::Spherical];

    pub fn from_int(eps: i64) -> Result<Self> {
        match eps {
            -1 => Ok(Self::Hyperbolic),
            0 => Ok(Self::Flat),
            1 => Ok(Self::Spherical),
            other => Err(Error::domain(format!("eps must be -1, 0 or 1, got {other}"))),
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Self::Hyperbolic => -1,
            Self::Flat => 0,
            Self::Spherical => 1,
        }
    }

    pub fn value(self) -> f64 {
        f64::from(self.as_i8())
    }
}

impl TryFrom<i8> for SpaceFormSign {
    type Error = Error;
    fn try_from(v: i8) -> Result<Self> {
        Self::from_int(i64::from(v))
    }
}

impl From<SpaceFormSign> for i8 {
    fn from(s: SpaceFormSign) -> i8 {
        s.as_i8()
    }
}

impl fmt::Display for SpaceFormSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

/// Selects one abstract standard surface: `(eps, C)` plus the quadrature base point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileParams {
    pub eps: SpaceFormSign,
    pub c: f64,
    /// Base point of the arclength integral; `None` selects the default midpoint.
    pub xi00: Option<f64>,
}

impl ProfileParams {
    pub fn new(eps: SpaceFormSign, c: f64) -> Self {
        Self { eps, c, xi00: None }
    }

    pub fn with_base_point(mut self, xi00: f64) -> Self {
        self.xi00 = Some(xi00);
        self
    }

    /// Checks the admissibility rule for `C` (independent of the base point).
    pub fn check_admissible(&self) -> Result<()> {
        if !self.c.is_finite() {
            return Err(Error::Inadmissible(format!("C must be finite, got {}", self.c)));
        }
        match self.eps {
            SpaceFormSign::Spherical if self.c <= 4.0 / SQRT_3 => Err(Error::Inadmissible(format!(
                "eps = 1 requires C > 4/sqrt(3) ~= {:.4}, got C = {}",
                4.0 / SQRT_3,
                self.c
            ))),
            SpaceFormSign::Flat if self.c <= 0.0 => {
                Err(Error::Inadmissible(format!("eps = 0 requires C > 0, got C = {}", self.c)))
            }
            _ => Ok(()),
        }
    }
}

/// Vanishing points of `T` bounding the block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootPair {
    pub xi01: f64,
    pub xi02: f64,
    /// Interior critical point `(3C/4)^(3/2)` of `T`, present when `C > 0`.
    pub xi_star: Option<f64>,
}

/// A value that may be `+infinity`, kept as a tag rather than a sentinel float.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            Self::PosInfinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::PosInfinity)
    }

    /// Lossy view for comparisons.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

/// Which vanishing point of `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootSide {
    Lower,
    Upper,
}

#[inline]
pub(crate) fn t_raw(eps: f64, c: f64, xi: f64) -> f64 {
    -xi.powf(8.0 / 3.0) + c * xi * xi - 3.0 * eps
}

#[inline]
pub(crate) fn t_prime(c: f64, xi: f64) -> f64 {
    -(8.0 / 3.0) * xi.powf(5.0 / 3.0) + 2.0 * c * xi
}

/// The potential `T(xi) = -xi^(8/3) + C xi^2 - 3 eps`.
pub fn potential_t(xi: f64, params: &ProfileParams) -> Result<f64> {
    if !(xi >= 0.0) {
        return Err(Error::domain(format!("T is defined for xi >= 0, got {xi}")));
    }
    Ok(t_raw(params.eps.value(), params.c, xi))
}

/// `(T(r + d) - T(r)) / d`, evaluated without cancellation for small `d`.
fn t_slope(c: f64, r: f64, d: f64) -> f64 {
    if d == 0.0 {
        return t_prime(c, r);
    }
    let z = d / r;
    let pow_part = -r.powf(8.0 / 3.0) * ((8.0 / 3.0) * z.ln_1p()).exp_m1() / d;
    pow_part + c * (2.0 * r + d)
}

/// Brackets each vanishing point of `T` with the critical point and refines it.
pub fn find_roots(params: &ProfileParams) -> Result<RootPair> {
    params.check_admissible()?;
    let eps = params.eps.value();
    let c = params.c;
    let xi_star = (c > 0.0).then(|| (0.75 * c).powf(1.5));
    let tol = 1e-15;
    let f = |x: f64| (t_raw(eps, c, x), t_prime(c, x));

    // Upper root: T decreases past the critical point (or from 0 when C <= 0).
    let lo = xi_star.unwrap_or(0.0);
    if params.eps == SpaceFormSign::Spherical && t_raw(eps, c, lo) <= 0.0 {
        return Err(Error::Inadmissible(format!(
            "T has no positive part for eps = 1, C = {c}; requires C > 4/sqrt(3)"
        )));
    }
    let mut hi = lo.max(1.0) * 2.0;
    while t_raw(eps, c, hi) >= 0.0 {
        hi *= 2.0;
        if hi > 1e150 {
            return Err(Error::numerical("failed to bracket the upper root of T"));
        }
    }
    let xi02 = safeguarded_newton(f, lo, hi, tol)?;

    let xi01 = match params.eps {
        SpaceFormSign::Spherical => {
            let star = xi_star.expect("C > 0 when eps = 1");
            safeguarded_newton(f, 0.0, star, tol)?
        }
        _ => 0.0,
    };
    Ok(RootPair { xi01, xi02, xi_star })
}

/// Position inside the block in smooth coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Loc {
    /// `xi = xi02 - t^2`
    Upper(f64),
    /// `u = ln xi`
    Middle(f64),
    /// `xi = xi01 + t^2`
    Lower(f64),
}

impl Loc {
    fn segment(self) -> usize {
        match self {
            Loc::Upper(_) => 0,
            Loc::Middle(_) => 1,
            Loc::Lower(_) => 2,
        }
    }

    fn param(self) -> f64 {
        match self {
            Loc::Upper(p) | Loc::Middle(p) | Loc::Lower(p) => p,
        }
    }

    fn with_param(self, p: f64) -> Loc {
        match self {
            Loc::Upper(_) => Loc::Upper(p),
            Loc::Middle(_) => Loc::Middle(p),
            Loc::Lower(_) => Loc::Lower(p),
        }
    }
}

/// One tabulated sample of the profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableNode {
    pub xi: f64,
    pub rho: f64,
    pub drho_dxi: f64,
}

/// Value and derivatives of the base-block inverse `xi0(rho)`, expressed through `y = ln xi0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseSample {
    pub xi: f64,
    /// `d ln xi0 / d rho`
    pub dlog: f64,
    /// `d^2 ln xi0 / d rho^2`
    pub d2log: f64,
}

/// Solved profile for one parameter pair; immutable after construction.
#[derive(Debug, Clone)]
pub struct ProfileSolution {
    pub params: ProfileParams,
    pub roots: RootPair,
    pub xi00: f64,
    pub rho_minus: f64,
    pub rho_plus: ExtendedReal,
    eps: f64,
    c: f64,
    t_upper_win: f64,
    t_lower_win: Option<f64>,
    u_top: f64,
    u_bot: Option<f64>,
    // Arclength measured from the upper root: R(loc) = rho0(loc) - rho_minus.
    j_upper: f64,
    j_middle: f64,
    j_lower: f64,
    shift: f64,
    /// Reference width used for table spacing.
    width_ref: f64,
    nodes: Vec<(Loc, f64)>,
    table: Vec<TableNode>,
    interp: QuinticHermite,
}

struct Bracket {
    lo: f64,
    hi: f64,
}

impl ProfileSolution {
    /// Solves roots, limits and builds the inversion table.
    pub fn build(params: ProfileParams) -> Result<Self> {
        let roots = find_roots(&params)?;
        let eps = params.eps.value();
        let c = params.c;
        let spherical = params.eps == SpaceFormSign::Spherical;
        let width = (0.1 * (roots.xi02 - roots.xi01)).min(0.5);
        let xi00 = match params.xi00 {
            Some(x) => {
                if !(x > roots.xi01 && x < roots.xi02) {
                    return Err(Error::domain(format!(
                        "base point xi00 = {x} must lie in ({}, {})",
                        roots.xi01, roots.xi02
                    )));
                }
                x
            }
            None if spherical => (roots.xi01 * roots.xi02).sqrt(),
            None => 0.5 * roots.xi02,
        };
        let mut sol = Self {
            params: ProfileParams {
                xi00: Some(xi00),
                ..params
            },
            roots,
            xi00,
            rho_minus: 0.0,
            rho_plus: ExtendedReal::PosInfinity,
            eps,
            c,
            t_upper_win: width.sqrt(),
            t_lower_win: spherical.then(|| width.sqrt()),
            u_top: (roots.xi02 - width).ln(),
            u_bot: spherical.then(|| (roots.xi01 + width).ln()),
            j_upper: 0.0,
            j_middle: 0.0,
            j_lower: 0.0,
            shift: 0.0,
            width_ref: 0.0,
            nodes: Vec::new(),
            table: Vec::new(),
            interp: QuinticHermite::new(&[
                HermiteNode { x: 0.0, y: 0.0, dy: 0.0, d2y: 0.0 },
                HermiteNode { x: 1.0, y: 0.0, dy: 0.0, d2y: 0.0 },
            ]),
        };
        sol.j_upper = sol.seg_integral(Loc::Upper(0.0), Loc::Upper(sol.t_upper_win))?;
        if let (Some(ub), Some(tw)) = (sol.u_bot, sol.t_lower_win) {
            sol.j_middle = sol.seg_integral(Loc::Middle(sol.u_top), Loc::Middle(ub))?;
            sol.j_lower = sol.seg_integral(Loc::Lower(tw), Loc::Lower(0.0))?;
        }
        let loc00 = sol.loc_of_xi(xi00);
        sol.shift = sol.r_between(Loc::Upper(0.0), loc00)?;
        sol.rho_minus = -sol.shift;
        if spherical {
            sol.rho_plus = ExtendedReal::Finite(sol.j_upper + sol.j_middle + sol.j_lower - sol.shift);
            sol.width_ref = sol.j_upper + sol.j_middle + sol.j_lower;
        } else {
            sol.width_ref = sol.r_between(Loc::Upper(0.0), Loc::Middle((0.5 * roots.xi02).ln()))?;
        }
        sol.build_table()?;
        Ok(sol)
    }

    // ---- smooth-coordinate machinery ----

    fn loc_of_xi(&self, xi: f64) -> Loc {
        let (r1, r2) = (self.roots.xi01, self.roots.xi02);
        if xi >= r2 - self.t_upper_win * self.t_upper_win {
            Loc::Upper((r2 - xi).max(0.0).sqrt())
        } else if matches!(self.t_lower_win, Some(tw) if xi <= r1 + tw * tw) {
            Loc::Lower((xi - r1).max(0.0).sqrt())
        } else {
            Loc::Middle(xi.ln())
        }
    }

    pub(crate) fn xi_of_loc(&self, loc: Loc) -> f64 {
        match loc {
            Loc::Upper(t) => self.roots.xi02 - t * t,
            Loc::Middle(u) => u.exp(),
            Loc::Lower(t) => self.roots.xi01 + t * t,
        }
    }

    /// `T` at a located point, accurate to relative precision near the roots.
    pub(crate) fn t_of_loc(&self, loc: Loc) -> f64 {
        match loc {
            Loc::Upper(t) => {
                let s = t * t;
                s * -t_slope(self.c, self.roots.xi02, -s)
            }
            Loc::Lower(t) => {
                let s = t * t;
                s * t_slope(self.c, self.roots.xi01, s)
            }
            Loc::Middle(u) => t_raw(self.eps, self.c, u.exp()),
        }
    }

    /// Positive arclength density with respect to the segment parameter.
    fn density(&self, loc: Loc) -> f64 {
        match loc {
            Loc::Upper(t) => {
                let s = t * t;
                2.0 * SQRT_3 / ((self.roots.xi02 - s) * (-t_slope(self.c, self.roots.xi02, -s)).sqrt())
            }
            Loc::Lower(t) => {
                let s = t * t;
                2.0 * SQRT_3 / ((self.roots.xi01 + s) * t_slope(self.c, self.roots.xi01, s).sqrt())
            }
            Loc::Middle(u) => SQRT_3 / t_raw(self.eps, self.c, u.exp()).sqrt(),
        }
    }

    /// Derivative of `R` (arclength from the upper root) with respect to the segment parameter.
    fn dr_dparam(&self, loc: Loc) -> f64 {
        match loc {
            Loc::Upper(_) => self.density(loc),
            Loc::Middle(_) | Loc::Lower(_) => -self.density(loc),
        }
    }

    fn quad_opts(&self) -> QuadOptions {
        QuadOptions {
            abs_tol: 0.0,
            // GK15 error estimates never drop below ~1.1e-14 relative.
            rel_tol: 2e-14,
            max_panels: 4000,
        }
    }

    /// `R(b) - R(a)` for two points of the same segment.
    fn seg_integral(&self, a: Loc, b: Loc) -> Result<f64> {
        debug_assert_eq!(a.segment(), b.segment());
        let (pa, pb) = (a.param(), b.param());
        if pa == pb {
            return Ok(0.0);
        }
        let v = quadrature::integrate(|p| self.density(a.with_param(p)), pa, pb, self.quad_opts())?;
        Ok(match a {
            Loc::Upper(_) => v,
            _ => -v,
        })
    }

    fn seg_start(&self, seg: usize) -> Loc {
        match seg {
            0 => Loc::Upper(0.0),
            1 => Loc::Middle(self.u_top),
            _ => Loc::Lower(self.t_lower_win.expect("lower segment")),
        }
    }

    fn seg_end(&self, seg: usize) -> Loc {
        match seg {
            0 => Loc::Upper(self.t_upper_win),
            1 => Loc::Middle(self.u_bot.expect("bounded middle segment")),
            _ => Loc::Lower(0.0),
        }
    }

    fn seg_full(&self, seg: usize) -> f64 {
        [self.j_upper, self.j_middle, self.j_lower][seg]
    }

    fn r_start(&self, seg: usize) -> f64 {
        match seg {
            0 => 0.0,
            1 => self.j_upper,
            _ => self.j_upper + self.j_middle,
        }
    }

    /// `R(b) - R(a)` for arbitrary points, splitting at segment boundaries.
    fn r_between(&self, a: Loc, b: Loc) -> Result<f64> {
        let (sa, sb) = (a.segment(), b.segment());
        if sa == sb {
            return self.seg_integral(a, b);
        }
        if sa > sb {
            return Ok(-self.r_between(b, a)?);
        }
        let mut total = self.seg_integral(a, self.seg_end(sa))?;
        for s in sa + 1..sb {
            total += self.seg_full(s);
        }
        total += self.seg_integral(self.seg_start(sb), b)?;
        Ok(total)
    }

    fn segment_for_r(&self, r: f64) -> usize {
        if r <= self.j_upper {
            0
        } else if self.u_bot.is_some() && r >= self.j_upper + self.j_middle {
            2
        } else {
            1
        }
    }

    fn param_bracket(&self, seg: usize) -> Bracket {
        match seg {
            0 => Bracket { lo: 0.0, hi: self.t_upper_win },
            1 => Bracket {
                lo: self.u_bot.unwrap_or(f64::NEG_INFINITY),
                hi: self.u_top,
            },
            _ => Bracket { lo: 0.0, hi: self.t_lower_win.expect("lower segment") },
        }
    }

    /// Finds the point with `R(loc) = r_target`, integrating from `anchor`.
    fn solve_r(&self, r_target: f64, anchor: (Loc, f64), seed: Option<f64>) -> Result<(Loc, f64)> {
        let seg = self.segment_for_r(r_target);
        let mut br = self.param_bracket(seg);
        // Anchor must lie in the target segment; otherwise start from the segment entry.
        let (mut a_loc, mut a_r) = if anchor.0.segment() == seg {
            anchor
        } else {
            let s = self.seg_start(seg);
            (s, self.r_start(seg))
        };
        let template = self.seg_start(seg);
        let mut p = seed.unwrap_or(a_loc.param());
        if !(p > br.lo && p < br.hi) {
            p = if br.lo.is_finite() { 0.5 * (br.lo + br.hi) } else { a_loc.param() };
        }
        let r_scale = r_target.abs().max(self.width_ref).max(1e-300);
        for _ in 0..100 {
            let loc = template.with_param(p);
            let r = a_r + self.seg_integral(a_loc, loc)?;
            let g = r - r_target;
            // R increases with t on the upper segment and decreases with u, t elsewhere.
            let increasing = seg == 0;
            if (g < 0.0) == increasing {
                br.lo = br.lo.max(p);
            } else {
                br.hi = br.hi.min(p);
            }
            if g.abs() <= 2.0 * f64::EPSILON * r_scale {
                return Ok((loc, r));
            }
            let d = self.dr_dparam(loc);
            let mut next = p - g / d;
            if !(next > br.lo && next < br.hi) || !next.is_finite() {
                next = if br.lo.is_finite() {
                    0.5 * (br.lo + br.hi)
                } else {
                    p - 4.0 * (1.0 + p.abs())
                };
            }
            a_loc = loc;
            a_r = r;
            let step = next - p;
            p = next;
            if step.abs() <= 4.0 * f64::EPSILON * p.abs().max(self.t_upper_win) {
                let loc = template.with_param(p);
                let r = a_r + self.seg_integral(a_loc, loc)?;
                return Ok((loc, r));
            }
        }
        Err(Error::numerical(format!("inversion of rho0 did not converge for R = {r_target}")))
    }

    fn hermite_node(&self, rho: f64, loc: Loc) -> HermiteNode {
        let xi = self.xi_of_loc(loc);
        let t = self.t_of_loc(loc).max(0.0);
        HermiteNode {
            x: rho,
            y: xi.ln(),
            dy: -(t / 3.0).sqrt(),
            d2y: xi * t_prime(self.c, xi) / 6.0,
        }
    }

    fn build_table(&mut self) -> Result<()> {
        let mut nodes: Vec<(Loc, f64)> = vec![(Loc::Upper(0.0), 0.0)];
        let mut hnodes = vec![self.hermite_node(self.rho_minus, Loc::Upper(0.0))];
        let base = self.width_ref;
        match self.rho_plus {
            ExtendedReal::Finite(_) => {
                let n = 1000;
                let h = base / n as f64;
                for k in 1..n {
                    let r = k as f64 * h;
                    let last = *nodes.last().expect("non-empty");
                    let seed = self.linear_seed(last, r);
                    let (loc, rr) = self.solve_r(r, last, seed)?;
                    nodes.push((loc, rr));
                    hnodes.push(self.hermite_node(rr - self.shift, loc));
                }
                let end = Loc::Lower(0.0);
                nodes.push((end, base));
                hnodes.push(self.hermite_node(base - self.shift, end));
            }
            ExtendedReal::PosInfinity => {
                let tail = match self.params.eps {
                    SpaceFormSign::Hyperbolic => 600.0,
                    _ => 1e6 * base,
                };
                let h_min = 1e-3 * base;
                let mut r = 0.0;
                let mut h = h_min;
                while r < tail {
                    let cap = (1e-3 * base).max(0.01 * r);
                    let trial = h.min(cap);
                    let r_next = r + trial;
                    let last = *nodes.last().expect("non-empty");
                    let seed = self.linear_seed(last, r_next);
                    let (loc, rr) = self.solve_r(r_next, last, seed)?;
                    let node = self.hermite_node(rr - self.shift, loc);
                    // Midpoint check against a direct inversion of the interpolant.
                    let prev = *hnodes.last().expect("non-empty");
                    let mid = 0.5 * (r + r_next);
                    let probe = QuinticHermite::new(&[prev, node]).eval(mid - self.shift).0;
                    let (mloc, _) = self.solve_r(mid, last, self.linear_seed(last, mid))?;
                    let exact = self.xi_of_loc(mloc).ln();
                    let err = (probe - exact).abs();
                    if err > 1e-14 * (1.0 + exact.abs()) && trial > 1e-6 * base {
                        h = 0.5 * trial;
                        continue;
                    }
                    nodes.push((loc, rr));
                    hnodes.push(node);
                    r = r_next;
                    h = if err < 1e-16 { trial * 1.5 } else { trial * 1.1 };
                    if !(self.xi_of_loc(loc) > 0.0) {
                        break;
                    }
                }
            }
        }
        self.table = nodes
            .iter()
            .zip(&hnodes)
            .filter(|((loc, _), _)| !matches!(loc, Loc::Upper(t) | Loc::Lower(t) if *t == 0.0))
            .map(|((loc, _), hn)| {
                let xi = self.xi_of_loc(*loc);
                TableNode {
                    xi,
                    rho: hn.x,
                    drho_dxi: -(3.0 / (xi * xi * self.t_of_loc(*loc))).sqrt(),
                }
            })
            .collect();
        self.table.reverse();
        self.interp = QuinticHermite::new(&hnodes);
        self.nodes = nodes;
        Ok(())
    }

    /// First-order guess for the parameter reaching `r_target` from a known point.
    fn linear_seed(&self, last: (Loc, f64), r_target: f64) -> Option<f64> {
        if self.segment_for_r(r_target) != last.0.segment() {
            return None;
        }
        Some(last.0.param() + (r_target - last.1) / self.dr_dparam(last.0))
    }

    // ---- public operations ----

    pub fn eps(&self) -> SpaceFormSign {
        self.params.eps
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `T(xi)`.
    pub fn potential(&self, xi: f64) -> f64 {
        t_raw(self.eps, self.c, xi)
    }

    fn check_open(&self, xi: f64) -> Result<()> {
        if xi > self.roots.xi01 && xi < self.roots.xi02 {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "xi = {xi} outside the open block ({}, {})",
                self.roots.xi01, self.roots.xi02
            )))
        }
    }

    /// `rho0(xi)`: signed arclength from the base point along `theta = const`.
    pub fn rho0(&self, xi: f64) -> Result<f64> {
        self.check_open(xi)?;
        let loc = self.loc_of_xi(xi);
        // Anchor at the nearest tabulated point of the same segment.
        let anchor = self.nearest_anchor(loc);
        Ok(anchor.1 + self.seg_integral(anchor.0, loc)? - self.shift)
    }

    fn nearest_anchor(&self, loc: Loc) -> (Loc, f64) {
        let seg = loc.segment();
        let p = loc.param();
        let mut best = (self.seg_start(seg), self.r_start(seg));
        let mut best_d = (best.0.param() - p).abs();
        // Nodes are ordered by R; within a segment parameters are monotone.
        let idx = self.nodes.partition_point(|(l, _)| {
            l.segment() < seg
                || (l.segment() == seg
                    && match l {
                        Loc::Upper(q) => *q < p,
                        Loc::Middle(q) | Loc::Lower(q) => *q > p,
                    })
        });
        for j in [idx.saturating_sub(1), idx] {
            if let Some(&(l, r)) = self.nodes.get(j) {
                if l.segment() == seg {
                    let d = (l.param() - p).abs();
                    if d < best_d {
                        best = (l, r);
                        best_d = d;
                    }
                }
            }
        }
        best
    }

    /// Analytic slope `d rho0 / d xi = -sqrt(3 / (xi^2 T(xi)))`.
    pub fn drho0_dxi(&self, xi: f64) -> Result<f64> {
        self.check_open(xi)?;
        let t = self.t_of_loc(self.loc_of_xi(xi));
        Ok(-(3.0 / (xi * xi * t)).sqrt())
    }

    /// `(rho_{0,-1}, rho_{0,1})`; the upper limit is infinite unless `eps = 1`.
    pub fn rho0_limits(&self) -> (f64, ExtendedReal) {
        (self.rho_minus, self.rho_plus)
    }

    /// Width of the base block `rho_{0,1} - rho_{0,-1}` (eps = 1 only).
    pub fn block_width(&self) -> Option<f64> {
        self.rho_plus.finite().map(|p| p - self.rho_minus)
    }

    /// Reference arclength scale of the block (block width for eps = 1).
    pub fn width_ref(&self) -> f64 {
        self.width_ref
    }

    /// Limit of `sqrt(|xi - root|) / sqrt(T(xi))` at a finite root, i.e. `1/sqrt(|T'(root)|)`.
    ///
    /// Multiplying by `sqrt(3)/root` gives the coefficient of the `rho0` integrand.
    pub fn endpoint_singularity_coeff(&self, which: RootSide) -> Result<f64> {
        let c = self.c;
        match which {
            RootSide::Upper => {
                let r = self.roots.xi02;
                Ok((3.0 / (8.0 * r.powf(5.0 / 3.0) - 6.0 * c * r)).sqrt())
            }
            RootSide::Lower => {
                if self.params.eps != SpaceFormSign::Spherical {
                    return Err(Error::NotApplicable(
                        "xi01 = 0 is not a simple root of T for eps in {-1, 0}".into(),
                    ));
                }
                let r = self.roots.xi01;
                Ok((3.0 / (-8.0 * r.powf(5.0 / 3.0) + 6.0 * c * r)).sqrt())
            }
        }
    }

    /// `xi0(rho)`: polished inverse of `rho0` on the open interval `(rho_minus, rho_plus)`.
    pub fn invert_rho0(&self, rho: f64) -> Result<f64> {
        if !(rho > self.rho_minus && rho < self.rho_plus.to_f64()) {
            return Err(Error::domain(format!(
                "rho = {rho} outside ({}, {})",
                self.rho_minus,
                self.rho_plus.to_f64()
            )));
        }
        Ok(self.xi_of_loc(self.invert_loc(rho)?.0))
    }

    /// Located point and its distance `R` from the upper root for `rho0 = rho`.
    pub(crate) fn invert_loc(&self, rho: f64) -> Result<(Loc, f64)> {
        let r = rho + self.shift;
        let i = self.nodes.partition_point(|(_, nr)| *nr <= r);
        let below = self.nodes[i.saturating_sub(1)];
        let anchor = match self.nodes.get(i) {
            Some(&above) if above.1 - r < r - below.1 => above,
            _ => below,
        };
        self.solve_r(r, anchor, self.linear_seed(anchor, r))
    }

    /// Fast evaluation of `xi0` on the closed base block (or `[rho_minus, inf)`).
    ///
    /// Inside the tabulated range this uses the quintic interpolant for `ln xi0`
    /// and its slope; beyond it falls back to the polished inversion.
    pub fn base_sample(&self, rho: f64) -> Result<BaseSample> {
        let upper = self.rho_plus.to_f64();
        if !(rho >= self.rho_minus && rho <= upper) {
            return Err(Error::domain(format!("rho = {rho} outside [{}, {upper}]", self.rho_minus)));
        }
        if rho <= self.interp.x_max() {
            let (y, dy, _) = self.interp.eval(rho);
            let xi = y.exp();
            return Ok(BaseSample {
                xi,
                dlog: dy.min(0.0),
                d2log: xi * t_prime(self.c, xi) / 6.0,
            });
        }
        let (loc, _) = self.invert_loc(rho)?;
        let xi = self.xi_of_loc(loc);
        Ok(BaseSample {
            xi,
            dlog: -(self.t_of_loc(loc).max(0.0) / 3.0).sqrt(),
            d2log: xi * t_prime(self.c, xi) / 6.0,
        })
    }

    /// Polished version of [`Self::base_sample`], accurate to a few ulps everywhere.
    pub fn base_sample_precise(&self, rho: f64) -> Result<BaseSample> {
        let upper = self.rho_plus.to_f64();
        if rho == self.rho_minus || rho == upper {
            let xi = if rho == self.rho_minus { self.roots.xi02 } else { self.roots.xi01 };
            return Ok(BaseSample { xi, dlog: 0.0, d2log: xi * t_prime(self.c, xi) / 6.0 });
        }
        if !(rho > self.rho_minus && rho < upper) {
            return Err(Error::domain(format!("rho = {rho} outside [{}, {upper}]", self.rho_minus)));
        }
        let (loc, _) = self.invert_loc(rho)?;
        let xi = self.xi_of_loc(loc);
        Ok(BaseSample {
            xi,
            dlog: -(self.t_of_loc(loc).max(0.0) / 3.0).sqrt(),
            d2log: xi * t_prime(self.c, xi) / 6.0,
        })
    }

    /// End of the interpolated range in `rho`.
    pub fn table_rho_max(&self) -> f64 {
        self.interp.x_max()
    }

    /// Tabulated `(xi, rho0, d rho0/d xi)` on the open interval, ordered by increasing `xi`.
    pub fn table(&self) -> &[TableNode] {
        &self.table
    }

    /// The table as CSV with header `xi,rho,drho_dxi` and 17 significant digits.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("xi,rho,drho_dxi\n");
        for n in &self.table {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", n.xi, n.rho, n.drho_dxi));
        }
        out
    }

    /// `(rho_{0,-1}, rho_{0,1})` recomputed with tanh-sinh directly on the `xi` integrand.
    ///
    /// Shares no code path with the smooth-coordinate quadrature, so it serves as
    /// an independent check. The upper limit is `None` when it is infinite.
    pub fn rho0_limits_tanh_sinh(&self, tol: f64) -> Result<(f64, Option<f64>)> {
        let (r1, r2, c, eps) = (self.roots.xi01, self.roots.xi02, self.c, self.eps);
        let spherical = self.params.eps == SpaceFormSign::Spherical;
        let w = |xi: f64, t: f64| SQRT_3 / (xi * t.sqrt());
        let upper = quadrature::tanh_sinh(
            |xi, dl, dr| {
                let t = if dr < dl { dr * -t_slope(c, r2, -dr) } else { t_raw(eps, c, xi) };
                w(xi, t)
            },
            self.xi00,
            r2,
            tol,
        )?;
        let lower = if spherical {
            Some(quadrature::tanh_sinh(
                |xi, dl, dr| {
                    let t = if dl < dr { dl * t_slope(c, r1, dl) } else { t_raw(eps, c, xi) };
                    w(xi, t)
                },
                r1,
                self.xi00,
                tol,
            )?)
        } else {
            None
        };
        Ok((-upper, lower))
    }

    /// Bound for `rho0(xi)` obtained by freezing the `1/tau` factor at an endpoint.
    ///
    /// Below the base point this is an upper bound using `1/xi01`, above it a
    /// lower bound using `1/xi00`.
    pub fn rho0_comparison_bound(&self, xi: f64) -> Result<f64> {
        self.check_open(xi)?;
        let inv_sqrt_t = |x: f64| 1.0 / self.t_of_loc(self.loc_of_xi(x)).sqrt();
        if xi < self.xi00 {
            if self.params.eps != SpaceFormSign::Spherical {
                return Err(Error::NotApplicable("the bound below the base point needs xi01 > 0".into()));
            }
            let v = quadrature::tanh_sinh(|x, _, _| inv_sqrt_t(x), xi, self.xi00, 1e-13)?;
            Ok(SQRT_3 / self.roots.xi01 * v)
        } else {
            let v = quadrature::tanh_sinh(|x, _, _| inv_sqrt_t(x), self.xi00, xi, 1e-13)?;
            Ok(-SQRT_3 / self.xi00 * v)
        }
    }
}
