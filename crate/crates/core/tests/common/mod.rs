//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use piezo_core::geometry::RigidMass;
use piezo_core::netlist::{Netlist, Waveform};
use proptest::prelude::*;
use std::path::PathBuf;

/// Lowest natural frequency (rad/s) of a clamped Hermite beam with `elements`
/// elements and a rigid body hanging off the free end.
pub fn fem_omega(length: f64, ei: f64, rho_a: f64, body: &RigidMass, elements: usize) -> f64 {
    let h = length / elements as f64;
    let n = 2 * (elements + 1);
    let mut k = DMatrix::<f64>::zeros(n, n);
    let mut m = DMatrix::<f64>::zeros(n, n);
    #[rustfmt::skip]
    let ke = [
        [12.0, 6.0 * h, -12.0, 6.0 * h],
        [6.0 * h, 4.0 * h * h, -6.0 * h, 2.0 * h * h],
        [-12.0, -6.0 * h, 12.0, -6.0 * h],
        [6.0 * h, 2.0 * h * h, -6.0 * h, 4.0 * h * h],
    ];
    #[rustfmt::skip]
    let me = [
        [156.0, 22.0 * h, 54.0, -13.0 * h],
        [22.0 * h, 4.0 * h * h, 13.0 * h, -3.0 * h * h],
        [54.0, 13.0 * h, 156.0, -22.0 * h],
        [-13.0 * h, -3.0 * h * h, -22.0 * h, 4.0 * h * h],
    ];
    let ks = ei / h.powi(3);
    let ms = rho_a * h / 420.0;
    for e in 0..elements {
        let base = 2 * e;
        for i in 0..4 {
            for j in 0..4 {
                k[(base + i, base + j)] += ks * ke[i][j];
                m[(base + i, base + j)] += ms * me[i][j];
            }
        }
    }
    // Rigid body: tip translation δ and rotation θ move its centre by δ + rθ.
    let (t, r) = (n - 2, body.offset);
    m[(t, t)] += body.mass;
    m[(t, t + 1)] += body.mass * r;
    m[(t + 1, t)] += body.mass * r;
    m[(t + 1, t + 1)] += body.mass * r * r + body.rotary_inertia;

    // Clamp node 0.
    let k = k.view((2, 2), (n - 2, n - 2)).into_owned();
    let m = m.view((2, 2), (n - 2, n - 2)).into_owned();

    let lu = k.clone().lu();
    let mut x = DVector::from_element(n - 2, 1.0);
    let mut lambda = 0.0;
    for _ in 0..500 {
        let y = lu.solve(&(&m * &x)).unwrap();
        let next = y.dot(&(&k * &y)) / y.dot(&(&m * &y));
        x = &y / y.norm();
        if (next - lambda).abs() <= 1e-14 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.sqrt()
}

/// Resistive network: node count, resistors (a, b, R) with 0 meaning ground,
/// current injections per node, and one grounded source (node, volts).
#[derive(Debug, Clone)]
pub struct Network {
    pub nodes: usize,
    pub resistors: Vec<(usize, usize, f64)>,
    pub injections: Vec<f64>,
    pub source: Option<(usize, f64)>,
}

pub fn network() -> impl Strategy<Value = Network> {
    (2usize..=6).prop_flat_map(|nodes| {
        let tree = prop::collection::vec(1e1..1e5f64, nodes);
        let parents = (1..=nodes).map(|k| 0..k).collect::<Vec<_>>();
        let extra = prop::collection::vec((0..=nodes, 0..=nodes, 1e1..1e5f64), 0..8);
        let injections = prop::collection::vec(-1e-3..1e-3f64, nodes);
        let source = prop::option::of((1..=nodes, -10.0..10.0f64));
        (Just(nodes), tree, parents, extra, injections, source).prop_map(
            |(nodes, tree, parents, extra, injections, source)| {
                // Every node hangs off a lower-numbered one, so nothing floats.
                let mut resistors: Vec<_> = parents
                    .into_iter()
                    .zip(tree)
                    .enumerate()
                    .map(|(k, (p, r))| (k + 1, p, r))
                    .collect();
                resistors.extend(extra.into_iter().filter(|(a, b, _)| a != b));
                Network {
                    nodes,
                    resistors,
                    injections,
                    source,
                }
            },
        )
    })
}

pub fn node(k: usize) -> String {
    if k == 0 {
        "0".into()
    } else {
        format!("n{k}")
    }
}

pub fn to_netlist(net: &Network) -> Netlist {
    let mut n = Netlist::new();
    for (k, &(a, b, r)) in net.resistors.iter().enumerate() {
        n.resistor(&format!("r{k}"), &node(a), &node(b), r).unwrap();
    }
    for (k, &i) in net.injections.iter().enumerate() {
        n.current_source(&format!("i{k}"), "0", &node(k + 1), Waveform::Dc(i))
            .unwrap();
    }
    if let Some((k, v)) = net.source {
        n.voltage_source("vs", &node(k), "0", Waveform::Dc(v))
            .unwrap();
    }
    n
}

/// Nodal analysis with the source node eliminated, solved by Gaussian
/// elimination with partial pivoting.
pub fn nodal_oracle(net: &Network) -> Vec<f64> {
    let n = net.nodes;
    let mut g = vec![vec![0.0; n + 1]; n];
    for &(a, b, r) in &net.resistors {
        let y = 1.0 / r;
        for (p, q) in [(a, b), (b, a)] {
            if p > 0 {
                g[p - 1][p - 1] += y;
                if q > 0 {
                    g[p - 1][q - 1] -= y;
                }
            }
        }
    }
    for (k, &i) in net.injections.iter().enumerate() {
        g[k][n] += i;
    }
    if let Some((s, v)) = net.source {
        let s = s - 1;
        for (row, eq) in g.iter_mut().enumerate() {
            if row != s {
                eq[n] -= eq[s] * v;
                eq[s] = 0.0;
            }
        }
        g[s] = vec![0.0; n + 1];
        g[s][s] = 1.0;
        g[s][n] = v;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| g[x][col].abs().total_cmp(&g[y][col].abs()))
            .unwrap();
        g.swap(col, pivot);
        let (top, rest) = g.split_at_mut(col + 1);
        let p = &top[col];
        for r in rest {
            let f = r[col] / p[col];
            for (a, b) in r[col..].iter_mut().zip(&p[col..]) {
                *a -= f * b;
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| g[row][k] * x[k]).sum();
        x[row] = (g[row][n] - s) / g[row][row];
    }
    x
}

/// `(file name, text)` of every `.cir` file in `data/netlists/<sub>`.
pub fn corpus(sub: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data/netlists")
        .join(sub);
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "cir"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).unwrap())
        })
        .collect()
}
