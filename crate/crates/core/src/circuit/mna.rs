//! Unknown layout, connectivity check and element stamps.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use super::diode::diode_current;
use super::Method;
use crate::error::{Error, Result};
use crate::netlist::{ElementKind, Netlist, GROUND};

/// Index of one element's terminals and extra unknowns.
#[derive(Debug, Clone)]
pub(crate) struct ElementMap {
    pub nodes: Vec<Option<usize>>,
    /// First branch-current unknown (voltage sources, inductors,
    /// transformers).
    pub branch: Option<usize>,
    /// Position among elements of the same storage/nonlinear kind.
    pub slot: usize,
}

/// Sizes and unknown ordering of an assembled circuit.
#[derive(Debug, Clone)]
pub struct MnaSystem {
    pub(crate) netlist: Netlist,
    pub(crate) maps: Vec<ElementMap>,
    nodes: Vec<String>,
    branches: Vec<String>,
    pub(crate) capacitors: usize,
    pub(crate) inductors: usize,
    pub(crate) diodes: usize,
}

/// How storage elements are represented in one assembly.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Companion {
    /// Capacitors open, inductors shorted.
    Dc,
    /// Fixed-step companion models.
    Step { h: f64, method: Method },
    /// Capacitor voltages and inductor currents imposed; capacitor currents
    /// are extra unknowns after the regular ones.
    Initial,
}

/// Everything besides the netlist that one real-valued assembly needs.
pub(crate) struct StampInput<'a> {
    pub t: f64,
    pub companion: Companion,
    /// Per capacitor: (v_n, i_n), or the imposed voltage for `Initial`.
    pub cap_state: &'a [(f64, f64)],
    /// Per inductor: (i_n, v_n), or the imposed current for `Initial`.
    pub ind_state: &'a [(f64, f64)],
    pub junction_gmin: f64,
    /// Extra conductance from every node to ground.
    pub node_gmin: f64,
}

pub fn assemble_mna(netlist: &Netlist) -> Result<MnaSystem> {
    let sys = MnaSystem::layout(netlist)?;
    sys.check_connectivity(false)?;
    Ok(sys)
}

impl MnaSystem {
    pub(crate) fn layout(netlist: &Netlist) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for e in netlist.elements() {
            if !seen.insert(e.name.as_str()) {
                return Err(Error::DuplicateElement(e.name.clone()));
            }
        }
        let nodes: Vec<String> = netlist
            .nodes()
            .into_iter()
            .filter(|n| n != GROUND)
            .collect();
        let index = |name: &str| nodes.iter().position(|n| n == name);
        let mut branches = Vec::new();
        let mut maps = Vec::with_capacity(netlist.elements().len());
        let (mut caps, mut inds, mut diodes) = (0, 0, 0);
        for e in netlist.elements() {
            let node_idx = e.nodes.iter().map(|n| index(n)).collect();
            let first_branch = nodes.len() + branches.len();
            let (branch, slot) = match e.kind {
                ElementKind::VoltageSource(_) => {
                    branches.push(format!("i({})", e.name));
                    (Some(first_branch), 0)
                }
                ElementKind::Inductor { .. } => {
                    branches.push(format!("i({})", e.name));
                    inds += 1;
                    (Some(first_branch), inds - 1)
                }
                ElementKind::Transformer { .. } => {
                    branches.push(format!("i({}.p)", e.name));
                    branches.push(format!("i({}.s)", e.name));
                    (Some(first_branch), 0)
                }
                ElementKind::Capacitor { .. } => {
                    caps += 1;
                    (None, caps - 1)
                }
                ElementKind::Diode(_) => {
                    diodes += 1;
                    (None, diodes - 1)
                }
                _ => (None, 0),
            };
            maps.push(ElementMap {
                nodes: node_idx,
                branch,
                slot,
            });
        }
        Ok(Self {
            netlist: netlist.clone(),
            maps,
            nodes,
            branches,
            capacitors: caps,
            inductors: inds,
            diodes,
        })
    }

    /// Fails with the first node that has no conducting path to ground.
    /// Capacitors count as paths when `ac` is set.
    pub(crate) fn check_connectivity(&self, ac: bool) -> Result<()> {
        let n = self.nodes.len();
        let mut parent: Vec<usize> = (0..=n).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let id = |x: Option<usize>| x.map_or(0, |i| i + 1);
        for (e, m) in self.netlist.elements().iter().zip(&self.maps) {
            let pairs: &[(usize, usize)] = match e.kind {
                ElementKind::Resistor { .. }
                | ElementKind::Inductor { .. }
                | ElementKind::VoltageSource(_)
                | ElementKind::Diode(_) => &[(0, 1)],
                ElementKind::Capacitor { .. } if ac => &[(0, 1)],
                ElementKind::Transformer { .. } => &[(0, 1), (2, 3)],
                _ => &[],
            };
            for &(i, j) in pairs {
                let a = find(&mut parent, id(m.nodes[i]));
                let b = find(&mut parent, id(m.nodes[j]));
                parent[a] = b;
            }
        }
        let ground = find(&mut parent, 0);
        for i in 0..n {
            if find(&mut parent, i + 1) != ground {
                return Err(Error::FloatingNode(self.nodes[i].clone()));
            }
        }
        Ok(())
    }

    /// Number of unknowns.
    pub fn size(&self) -> usize {
        self.nodes.len() + self.branches.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    /// Non-ground nodes in unknown order.
    pub fn node_names(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        let name = crate::netlist::canonical_node(name);
        self.nodes.iter().position(|n| *n == name)
    }

    /// Names of all unknowns: `v(node)` then `i(branch)`.
    pub fn unknown_names(&self) -> Vec<String> {
        self.nodes
            .iter()
            .map(|n| format!("v({n})"))
            .chain(self.branches.iter().cloned())
            .collect()
    }

    /// DC matrix and right-hand side at t = 0 with every diode replaced by
    /// its zero-bias conductance.
    pub fn dc_system(&self) -> (DMatrix<f64>, DVector<f64>) {
        let junction = vec![0.0; self.diodes];
        let input = StampInput {
            t: 0.0,
            companion: Companion::Dc,
            cap_state: &[],
            ind_state: &[],
            junction_gmin: 0.0,
            node_gmin: 0.0,
        };
        let mut a = DMatrix::zeros(self.size(), self.size());
        let mut b = DVector::zeros(self.size());
        self.stamp(&input, &junction, &mut a, &mut b);
        (a, b)
    }

    pub(crate) fn system_size(&self, companion: Companion) -> usize {
        match companion {
            Companion::Initial => self.size() + self.capacitors,
            _ => self.size(),
        }
    }

    /// Junction voltage of every diode in `x`.
    pub(crate) fn junction_voltages(&self, x: &DVector<f64>) -> Vec<f64> {
        let mut v = vec![0.0; self.diodes];
        for (e, m) in self.netlist.elements().iter().zip(&self.maps) {
            if let ElementKind::Diode(_) = e.kind {
                v[m.slot] = voltage(x, m.nodes[0]) - voltage(x, m.nodes[1]);
            }
        }
        v
    }

    pub(crate) fn diode_params(&self) -> Vec<super::DiodeParams> {
        self.netlist
            .elements()
            .iter()
            .filter_map(|e| match e.kind {
                ElementKind::Diode(p) => Some(p),
                _ => None,
            })
            .collect()
    }

    /// Real-valued stamps for one Newton iterate, linearising each diode at
    /// the given junction voltage.
    pub(crate) fn stamp(
        &self,
        inp: &StampInput,
        junction: &[f64],
        a: &mut DMatrix<f64>,
        b: &mut DVector<f64>,
    ) {
        a.fill(0.0);
        b.fill(0.0);
        let nn = self.nodes.len();
        if inp.node_gmin > 0.0 {
            for i in 0..nn {
                a[(i, i)] += inp.node_gmin;
            }
        }
        let base = self.size();
        for (e, m) in self.netlist.elements().iter().zip(&self.maps) {
            let (p, q) = (m.nodes[0], m.nodes[1]);
            match e.kind {
                ElementKind::Resistor { resistance } => conductance(a, p, q, 1.0 / resistance),
                ElementKind::Capacitor { capacitance, .. } => match inp.companion {
                    Companion::Dc => {}
                    Companion::Step { h, method } => {
                        let (v_n, i_n) = inp.cap_state[m.slot];
                        let (g, hist) = match method {
                            Method::Trapezoidal => {
                                (2.0 * capacitance / h, 2.0 * capacitance / h * v_n + i_n)
                            }
                            Method::BackwardEuler => (capacitance / h, capacitance / h * v_n),
                        };
                        conductance(a, p, q, g);
                        inject(b, q, p, hist);
                    }
                    Companion::Initial => {
                        let k = base + m.slot;
                        incidence(a, p, q, k);
                        b[k] = inp.cap_state[m.slot].0;
                    }
                },
                ElementKind::Inductor { inductance, .. } => {
                    let k = m.branch.expect("inductor branch");
                    match inp.companion {
                        Companion::Dc => incidence(a, p, q, k),
                        Companion::Step { h, method } => {
                            incidence(a, p, q, k);
                            let (i_n, v_n) = inp.ind_state[m.slot];
                            match method {
                                Method::Trapezoidal => {
                                    let r = 2.0 * inductance / h;
                                    a[(k, k)] -= r;
                                    b[k] = -r * i_n - v_n;
                                }
                                Method::BackwardEuler => {
                                    let r = inductance / h;
                                    a[(k, k)] -= r;
                                    b[k] = -r * i_n;
                                }
                            }
                        }
                        Companion::Initial => {
                            add(a, p, Some(k), 1.0);
                            add(a, q, Some(k), -1.0);
                            a[(k, k)] = 1.0;
                            b[k] = inp.ind_state[m.slot].0;
                        }
                    }
                }
                ElementKind::VoltageSource(w) => {
                    let k = m.branch.expect("source branch");
                    incidence(a, p, q, k);
                    b[k] = w.value(inp.t);
                }
                ElementKind::CurrentSource(w) => inject(b, p, q, w.value(inp.t)),
                ElementKind::Transformer { ratio } => {
                    let kp = m.branch.expect("transformer branch");
                    let ks = kp + 1;
                    let (sp, sq) = (m.nodes[2], m.nodes[3]);
                    add(a, p, Some(kp), 1.0);
                    add(a, q, Some(kp), -1.0);
                    add(a, sp, Some(ks), 1.0);
                    add(a, sq, Some(ks), -1.0);
                    add(a, Some(kp), p, 1.0);
                    add(a, Some(kp), q, -1.0);
                    add(a, Some(kp), sp, -ratio);
                    add(a, Some(kp), sq, ratio);
                    a[(ks, ks)] = 1.0;
                    a[(ks, kp)] = ratio;
                }
                ElementKind::Diode(d) => {
                    let v0 = junction[m.slot];
                    let (i, g) = diode_current(v0, &d);
                    let g_tot = g + inp.junction_gmin;
                    let i_tot = i + inp.junction_gmin * v0;
                    conductance(a, p, q, g_tot);
                    inject(b, p, q, i_tot - g_tot * v0);
                }
            }
        }
    }

    /// Complex stamps at angular frequency `omega` using source phasors.
    pub(crate) fn stamp_ac(
        &self,
        omega: f64,
        a: &mut DMatrix<Complex64>,
        b: &mut DVector<Complex64>,
    ) {
        let j = Complex64::i();
        for (e, m) in self.netlist.elements().iter().zip(&self.maps) {
            let (p, q) = (m.nodes[0], m.nodes[1]);
            match e.kind {
                ElementKind::Resistor { resistance } => {
                    conductance(a, p, q, Complex64::from(1.0 / resistance))
                }
                ElementKind::Capacitor { capacitance, .. } => {
                    conductance(a, p, q, j * omega * capacitance)
                }
                ElementKind::Inductor { inductance, .. } => {
                    let k = m.branch.expect("inductor branch");
                    incidence(a, p, q, k);
                    a[(k, k)] -= j * omega * inductance;
                }
                ElementKind::VoltageSource(w) => {
                    let k = m.branch.expect("source branch");
                    incidence(a, p, q, k);
                    b[k] = w.phasor();
                }
                ElementKind::CurrentSource(w) => inject(b, p, q, w.phasor()),
                ElementKind::Transformer { ratio } => {
                    let kp = m.branch.expect("transformer branch");
                    let ks = kp + 1;
                    let (sp, sq) = (m.nodes[2], m.nodes[3]);
                    let one = Complex64::from(1.0);
                    let n = Complex64::from(ratio);
                    add(a, p, Some(kp), one);
                    add(a, q, Some(kp), -one);
                    add(a, sp, Some(ks), one);
                    add(a, sq, Some(ks), -one);
                    add(a, Some(kp), p, one);
                    add(a, Some(kp), q, -one);
                    add(a, Some(kp), sp, -n);
                    add(a, Some(kp), sq, n);
                    a[(ks, ks)] = one;
                    a[(ks, kp)] = n;
                }
                ElementKind::Diode(_) => unreachable!("diodes are rejected before AC assembly"),
            }
        }
    }
}

pub(crate) fn voltage(x: &DVector<f64>, node: Option<usize>) -> f64 {
    node.map_or(0.0, |i| x[i])
}

fn add<T: ComplexField>(a: &mut DMatrix<T>, i: Option<usize>, j: Option<usize>, v: T) {
    if let (Some(i), Some(j)) = (i, j) {
        a[(i, j)] += v;
    }
}

fn conductance<T: ComplexField>(a: &mut DMatrix<T>, p: Option<usize>, q: Option<usize>, g: T) {
    add(a, p, p, g.clone());
    add(a, q, q, g.clone());
    add(a, p, q, -g.clone());
    add(a, q, p, -g);
}

/// Branch current `k` leaves node `p` and enters node `q`; row `k` reads
/// v(p) − v(q).
fn incidence<T: ComplexField>(a: &mut DMatrix<T>, p: Option<usize>, q: Option<usize>, k: usize) {
    add(a, p, Some(k), T::one());
    add(a, q, Some(k), -T::one());
    add(a, Some(k), p, T::one());
    add(a, Some(k), q, -T::one());
}

/// Source current `i` drawn from node `p` and delivered to node `q`.
fn inject<T: ComplexField>(b: &mut DVector<T>, p: Option<usize>, q: Option<usize>, i: T) {
    if let Some(p) = p {
        b[p] -= i.clone();
    }
    if let Some(q) = q {
        b[q] += i;
    }
}
