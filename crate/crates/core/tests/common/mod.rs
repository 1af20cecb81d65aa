//! Definitional oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use cfc::multiindex::{IndexSet, MultiIndex};
use rand::Rng;

/// Every integer vector in `[-r, r]^d`.
pub fn box_points(d: usize, r: i32) -> Vec<MultiIndex> {
    let side = (2 * r + 1) as usize;
    (0..side.pow(d as u32))
        .map(|mut code| {
            let mut e = Vec::with_capacity(d);
            for _ in 0..d {
                e.push((code % side) as i32 - r);
                code /= side;
            }
            MultiIndex::new(e)
        })
        .collect()
}

/// `mu ⪯ nu` spelled out: `|mu_i| <= |nu_i|` for all `i`.
pub fn below(mu: &MultiIndex, nu: &MultiIndex) -> bool {
    mu.entries()
        .iter()
        .zip(nu.entries())
        .all(|(a, b)| a.abs() <= b.abs())
}

/// `mu ⪯ nu` with `|mu_i| < |nu_i|` for at least one `i`.
pub fn strictly_below(mu: &MultiIndex, nu: &MultiIndex) -> bool {
    below(mu, nu)
        && mu
            .entries()
            .iter()
            .zip(nu.entries())
            .any(|(a, b)| a.abs() < b.abs())
}

/// Definition of a lower set, checked against every vector of a box that
/// contains the set.
pub fn brute_is_lower(set: &IndexSet, r: i32) -> bool {
    let everything = box_points(set.dim(), r);
    set.iter()
        .all(|nu| everything.iter().filter(|mu| below(mu, nu)).all(|mu| set.contains(mu)))
}

/// Indices outside `set` whose strict predecessors all lie in `set`, searched
/// in `[-r, r]^d`.
pub fn brute_margin(set: &IndexSet, r: i32) -> BTreeSet<MultiIndex> {
    let everything = box_points(set.dim(), r);
    everything
        .iter()
        .filter(|nu| !set.contains(nu))
        .filter(|nu| {
            everything
                .iter()
                .filter(|mu| strictly_below(mu, nu))
                .all(|mu| set.contains(mu))
        })
        .cloned()
        .collect()
}

/// Downward closure of a few random points of `[-r, r]^d`.
pub fn random_lower_set<R: Rng>(rng: &mut R, d: usize, r: i32, generators: usize) -> IndexSet {
    let everything = box_points(d, r);
    let tops: Vec<MultiIndex> = (0..generators)
        .map(|_| MultiIndex::new((0..d).map(|_| rng.random_range(-r..=r)).collect()))
        .collect();
    let members = everything
        .into_iter()
        .filter(|mu| tops.iter().any(|t| below(mu, t)));
    IndexSet::from_indices(d, members).unwrap()
}
