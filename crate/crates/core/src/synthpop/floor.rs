//! Establishment floor-area model: `r_ik = c_i + d_k` square metres per
//! employee plus `p_ik` per establishment, with each industry-zone's floor
//! area split over permitted property types by shares `q_ijk`.
//!
//! The program is nonconvex in (c, d, p, q) jointly but convex in each
//! block, so it is solved by alternating exact coordinate descent: the
//! continuous block one variable at a time (closed-form 1-D quadratic with a
//! nonnegativity clamp), then the shares with pairwise mass transfers inside
//! each simplex. Several seeded starts are run and the best kept.
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Building, Establishment, MappingMatrix};
use crate::error::{Error, Result};
use crate::rng::{stream, tags};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FloorSolverOptions {
    pub max_iterations: usize,
    pub starts: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for FloorSolverOptions {
    fn default() -> Self {
        FloorSolverOptions {
            max_iterations: 10_000,
            starts: 8,
            tolerance: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloorModel {
    pub n_industries: usize,
    pub n_zones: usize,
    pub n_properties: usize,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    /// `p[i * n_zones + k]`.
    pub p: Vec<f64>,
    /// `q[(i * n_zones + k) * n_properties + j]`.
    pub q: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl FloorModel {
    pub fn rate(&self, i: usize, k: usize) -> f64 {
        self.c[i] + self.d[k]
    }

    pub fn per_establishment(&self, i: usize, k: usize) -> f64 {
        self.p[i * self.n_zones + k]
    }

    pub fn share(&self, i: usize, j: usize, k: usize) -> f64 {
        self.q[(i * self.n_zones + k) * self.n_properties + j]
    }

    /// Estimated floor area of one establishment.
    pub fn f_hat(&self, i: usize, k: usize, employment: u32) -> f64 {
        self.rate(i, k) * employment as f64 + self.per_establishment(i, k)
    }
}

/// Aggregated inputs of the program.
struct Inputs {
    ni: usize,
    nk: usize,
    nj: usize,
    ne: Vec<f64>,
    nt: Vec<f64>,
    fb: Vec<f64>,
    allowed: Vec<Vec<usize>>,
    active_zone: Vec<bool>,
}

impl Inputs {
    fn build(
        establishments: &[Establishment],
        buildings: &[Building],
        x: &MappingMatrix,
        n_zones: usize,
    ) -> Result<Inputs> {
        let ni = x.x.len();
        let nj = x.x.first().map_or(0, |r| r.len());
        let nk = n_zones;
        let mut ne = vec![0.0; ni * nk];
        let mut nt = vec![0.0; ni * nk];
        let mut fb = vec![0.0; nj * nk];
        let mut active_zone = vec![false; nk];
        for e in establishments {
            if e.industry >= ni || e.zone >= nk {
                return Err(Error::invalid(format!("establishment {} out of range", e.id)));
            }
            ne[e.industry * nk + e.zone] += e.employment as f64;
            nt[e.industry * nk + e.zone] += 1.0;
            active_zone[e.zone] = true;
        }
        for b in buildings {
            if b.property >= nj || b.zone >= nk || b.floor_m2 <= 0.0 {
                return Err(Error::invalid(format!("building {} is malformed", b.id)));
            }
            fb[b.property * nk + b.zone] += b.floor_m2;
        }
        let allowed: Vec<Vec<usize>> = (0..ni).map(|i| (0..nj).filter(|&j| x.x[i][j]).collect()).collect();
        for i in 0..ni {
            if allowed[i].is_empty() && (0..nk).any(|k| nt[i * nk + k] > 0.0) {
                return Err(Error::infeasible(format!("industry {i} maps to no property type")));
            }
        }
        Ok(Inputs {
            ni,
            nk,
            nj,
            ne,
            nt,
            fb,
            allowed,
            active_zone,
        })
    }
}

struct State<'a> {
    inp: &'a Inputs,
    c: Vec<f64>,
    d: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    /// Residual `S_jk - fB_jk` at `[j * nk + k]`.
    r: Vec<f64>,
}

impl<'a> State<'a> {
    fn f(&self, i: usize, k: usize) -> f64 {
        let nk = self.inp.nk;
        (self.c[i] + self.d[k]) * self.inp.ne[i * nk + k] + self.p[i * nk + k] * self.inp.nt[i * nk + k]
    }

    fn qi(&self, i: usize, k: usize, j: usize) -> usize {
        (i * self.inp.nk + k) * self.inp.nj + j
    }

    fn recompute_residuals(&mut self) {
        let inp = self.inp;
        self.r = inp.fb.iter().map(|v| -v).collect();
        for i in 0..inp.ni {
            for k in 0..inp.nk {
                let f = self.f(i, k);
                if f == 0.0 {
                    continue;
                }
                for &j in &inp.allowed[i] {
                    self.r[j * inp.nk + k] += f * self.q[self.qi(i, k, j)];
                }
            }
        }
    }

    fn objective(&self) -> f64 {
        let inp = self.inp;
        let mut s = 0.0;
        for k in (0..inp.nk).filter(|&k| inp.active_zone[k]) {
            for j in 0..inp.nj {
                s += self.r[j * inp.nk + k].powi(2);
            }
        }
        s
    }

    /// Adds `delta` to `f_ik` and updates the residuals.
    fn shift_f(&mut self, i: usize, k: usize, delta: f64) {
        let nk = self.inp.nk;
        for &j in &self.inp.allowed[i] {
            let q = self.q[self.qi(i, k, j)];
            self.r[j * nk + k] += delta * q;
        }
    }

    fn continuous_sweep(&mut self, fix_c: bool) {
        let inp = self.inp;
        let nk = inp.nk;
        // p_ik
        for i in 0..inp.ni {
            for k in 0..nk {
                let nt = inp.nt[i * nk + k];
                if nt == 0.0 {
                    continue;
                }
                let (mut num, mut den) = (0.0, 0.0);
                for &j in &inp.allowed[i] {
                    let q = self.q[self.qi(i, k, j)];
                    num += q * self.r[j * nk + k];
                    den += q * q;
                }
                if den <= 0.0 {
                    continue;
                }
                let step = -num / den / nt;
                let new = (self.p[i * nk + k] + step).max(0.0);
                let delta = (new - self.p[i * nk + k]) * nt;
                self.p[i * nk + k] = new;
                self.shift_f(i, k, delta);
            }
        }
        // d_k
        for k in 0..nk {
            let (mut num, mut den) = (0.0, 0.0);
            let mut g = vec![0.0; inp.nj];
            for i in 0..inp.ni {
                let ne = inp.ne[i * nk + k];
                if ne == 0.0 {
                    continue;
                }
                for &j in &inp.allowed[i] {
                    g[j] += ne * self.q[self.qi(i, k, j)];
                }
            }
            for j in 0..inp.nj {
                num += g[j] * self.r[j * nk + k];
                den += g[j] * g[j];
            }
            if den <= 0.0 {
                continue;
            }
            let new = (self.d[k] - num / den).max(0.0);
            let delta = new - self.d[k];
            self.d[k] = new;
            for j in 0..inp.nj {
                self.r[j * nk + k] += delta * g[j];
            }
        }
        if fix_c {
            return;
        }
        // c_i
        for i in 0..inp.ni {
            let (mut num, mut den) = (0.0, 0.0);
            for k in 0..nk {
                let ne = inp.ne[i * nk + k];
                if ne == 0.0 {
                    continue;
                }
                for &j in &inp.allowed[i] {
                    let g = ne * self.q[self.qi(i, k, j)];
                    num += g * self.r[j * nk + k];
                    den += g * g;
                }
            }
            if den <= 0.0 {
                continue;
            }
            let new = (self.c[i] - num / den).max(0.0);
            let delta = new - self.c[i];
            self.c[i] = new;
            for k in 0..nk {
                let ne = inp.ne[i * nk + k];
                if ne != 0.0 {
                    self.shift_f(i, k, delta * ne);
                }
            }
        }
    }

    fn share_sweep(&mut self) {
        let inp = self.inp;
        let nk = inp.nk;
        for k in 0..nk {
            for i in 0..inp.ni {
                let f = self.f(i, k);
                let js = &inp.allowed[i];
                if f <= 0.0 || js.len() < 2 {
                    continue;
                }
                for a in 0..js.len() {
                    for b in a + 1..js.len() {
                        let (j1, j2) = (js[a], js[b]);
                        let (i1, i2) = (self.qi(i, k, j1), self.qi(i, k, j2));
                        // Move t of the share from j1 to j2.
                        let t = ((self.r[j1 * nk + k] - self.r[j2 * nk + k]) / (2.0 * f)).clamp(-self.q[i2], self.q[i1]);
                        if t == 0.0 {
                            continue;
                        }
                        self.q[i1] -= t;
                        self.q[i2] += t;
                        self.r[j1 * nk + k] -= f * t;
                        self.r[j2 * nk + k] += f * t;
                    }
                }
            }
        }
    }
}

fn solve(inp: &Inputs, opts: &FloorSolverOptions, fixed_c: Option<&[f64]>) -> Result<FloorModel> {
    let (ni, nk, nj) = (inp.ni, inp.nk, inp.nj);
    let total_emp: f64 = inp.ne.iter().sum();
    let total_fb: f64 = (0..nk)
        .filter(|&k| inp.active_zone[k])
        .map(|k| (0..nj).map(|j| inp.fb[j * nk + k]).sum::<f64>())
        .sum();
    let base_rate = if total_emp > 0.0 { total_fb / total_emp } else { 0.0 };
    let mut best: Option<FloorModel> = None;
    let mut any_converged = false;
    for start in 0..opts.starts.max(1) {
        let mut rng = stream(opts.seed, tags::FLOOR_STARTS, start as u64);
        let mut q = vec![0.0; ni * nk * nj];
        for i in 0..ni {
            let js = &inp.allowed[i];
            for k in 0..nk {
                let w: Vec<f64> = js
                    .iter()
                    .map(|_| if start == 0 { 1.0 } else { rng.random::<f64>() + 1e-3 })
                    .collect();
                let s: f64 = w.iter().sum();
                for (&j, wv) in js.iter().zip(&w) {
                    q[(i * nk + k) * nj + j] = wv / s;
                }
            }
        }
        let jitter = |rng: &mut crate::rng::SimRng| if start == 0 { 1.0 } else { rng.random_range(0.2..1.8) };
        let c = match fixed_c {
            Some(c) => c.to_vec(),
            None => (0..ni).map(|_| 0.5 * base_rate * jitter(&mut rng)).collect(),
        };
        let d = (0..nk).map(|_| 0.25 * base_rate * jitter(&mut rng)).collect();
        let p = (0..ni * nk).map(|_| 0.0).collect();
        let mut st = State {
            inp,
            c,
            d,
            p,
            q,
            r: Vec::new(),
        };
        st.recompute_residuals();
        let mut obj = st.objective();
        let mut converged = false;
        let mut iters = 0;
        let scale = total_fb.powi(2).max(1.0);
        while iters < opts.max_iterations {
            iters += 1;
            st.continuous_sweep(fixed_c.is_some());
            st.share_sweep();
            if iters % 50 == 0 {
                // Keep incremental residuals from drifting.
                st.recompute_residuals();
            }
            let new = st.objective();
            if obj - new <= opts.tolerance * obj.max(scale * 1e-12) || new <= 1e-12 * scale {
                converged = true;
                break;
            }
            obj = new;
        }
        st.recompute_residuals();
        obj = st.objective();
        any_converged |= converged;
        if best.as_ref().is_none_or(|b| obj < b.objective) {
            best = Some(FloorModel {
                n_industries: ni,
                n_zones: nk,
                n_properties: nj,
                c: st.c,
                d: st.d,
                p: st.p,
                q: st.q,
                objective: obj,
                iterations: iters,
            });
        }
    }
    if !any_converged {
        return Err(Error::NotConverged {
            what: "floor-area model".into(),
            iterations: opts.max_iterations,
        });
    }
    Ok(best.expect("at least one start"))
}

/// Fits the floor-area model over all zones.
pub fn estimate_floor_areas(
    establishments: &[Establishment],
    buildings: &[Building],
    x: &MappingMatrix,
    n_zones: usize,
    opts: &FloorSolverOptions,
) -> Result<FloorModel> {
    let inp = Inputs::build(establishments, buildings, x, n_zones)?;
    solve(&inp, opts, None)
}

/// Zone-by-zone readjustment before building assignment: the same program
/// is re-fitted on each zone alone with the industry rates `c_i` held at
/// the city-wide fit, then any zone whose establishments still exceed its
/// permitted building floor area is scaled down uniformly. Returns the
/// adjusted floor area per establishment id.
pub fn readjust_floor_areas(
    model: &FloorModel,
    establishments: &[Establishment],
    buildings: &[Building],
    x: &MappingMatrix,
    opts: &FloorSolverOptions,
) -> Result<Vec<f64>> {
    let nk = model.n_zones;
    let mut est_by_zone: Vec<Vec<&Establishment>> = vec![Vec::new(); nk];
    for e in establishments {
        est_by_zone[e.zone].push(e);
    }
    let mut bld_by_zone: Vec<Vec<&Building>> = vec![Vec::new(); nk];
    for b in buildings {
        bld_by_zone[b.zone].push(b);
    }
    let mut out = vec![0.0; establishments.iter().map(|e| e.id + 1).max().unwrap_or(0)];
    let zone_opts = FloorSolverOptions {
        starts: 1,
        ..*opts
    };
    for k in 0..nk {
        if est_by_zone[k].is_empty() {
            continue;
        }
        // Renumber to a one-zone problem.
        let ests: Vec<Establishment> = est_by_zone[k]
            .iter()
            .map(|e| Establishment {
                zone: 0,
                ..(*e).clone()
            })
            .collect();
        let blds: Vec<Building> = bld_by_zone[k]
            .iter()
            .map(|b| Building {
                zone: 0,
                ..(*b).clone()
            })
            .collect();
        let inp = Inputs::build(&ests, &blds, x, 1)?;
        let local = solve(&inp, &zone_opts, Some(&model.c))?;
        let mut areas: Vec<f64> = ests.iter().map(|e| local.f_hat(e.industry, 0, e.employment)).collect();
        let demand: f64 = areas.iter().sum();
        let supply: f64 = blds.iter().map(|b| b.floor_m2).sum();
        if demand > supply && demand > 0.0 {
            let s = supply / demand;
            areas.iter_mut().for_each(|a| *a *= s);
        }
        for (e, a) in ests.iter().zip(areas) {
            out[e.id] = a;
        }
    }
    Ok(out)
}
