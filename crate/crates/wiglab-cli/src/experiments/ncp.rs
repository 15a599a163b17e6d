//! Inspection of the non-crossing combinatorics: partition listings
//! with Kreweras complements and Moebius values, plus graph counts.

use std::fmt::Write;

use crate::CliError;
use wiglab_core::ncp::{
    catalan, enumerate_connected_ncg, enumerate_ncg, enumerate_ncp, kreweras, mobius_to_top,
    GroundSet,
};
use wiglab_core::semicircle::ncg_generating_polynomials;

const LISTING_LIMIT: usize = 6;

pub fn inspect(k: usize, graphs: bool) -> Result<String, CliError> {
    if k == 0 {
        return Err(CliError::Config("--k must be >= 1".into()));
    }
    let mut s = String::new();
    let ground = GroundSet::first_n(k);
    let all = enumerate_ncp(&ground)?;
    writeln!(s, "non-crossing partitions of [{k}]: {} (Catalan C_{k} = {})", all.len(), catalan(k)).unwrap();
    if k <= LISTING_LIMIT {
        writeln!(s, "{:<28} {:<28} {:>8}", "partition", "kreweras", "moebius").unwrap();
        for pi in &all {
            writeln!(
                s,
                "{:<28} {:<28} {:>8}",
                pi.to_text(),
                kreweras(pi).to_text(),
                mobius_to_top(pi)
            )
            .unwrap();
        }
    } else {
        writeln!(s, "(listing suppressed for k > {LISTING_LIMIT})").unwrap();
    }
    if graphs {
        let all_g = enumerate_ncg(&ground)?;
        let connected = enumerate_connected_ncg(&ground)?;
        writeln!(s, "non-crossing graphs on [{k}]: {} ({} connected)", all_g.len(), connected.len()).unwrap();
        let (a_poly, b_poly) = ncg_generating_polynomials(k)?;
        writeln!(s, "edge-count polynomial (all graphs): {}", poly_text(&a_poly)).unwrap();
        writeln!(s, "edge-count polynomial (non-adjacent edges only): {}", poly_text(&b_poly)).unwrap();
    }
    Ok(s)
}

fn poly_text(coeffs: &[i64]) -> String {
    let mut parts = Vec::new();
    for (e, &c) in coeffs.iter().enumerate() {
        if c == 0 {
            continue;
        }
        parts.push(match e {
            0 => format!("{c}"),
            1 => format!("{c} w"),
            _ => format!("{c} w^{e}"),
        });
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listing_contains_counts_and_moebius_values() {
        let report = inspect(4, true).unwrap();
        assert!(report.contains("non-crossing partitions of [4]: 14"));
        assert!(report.contains("non-crossing graphs on [4]: 48 (23 connected)"));
        // the worked value mu(12|3|4, top) = 2
        assert!(report
            .lines()
            .any(|l| l.starts_with("1 2|3|4") && l.trim_end().ends_with('2')));
    }

    #[test]
    fn large_k_suppresses_listing_but_keeps_counts() {
        let report = inspect(8, false).unwrap();
        assert!(report.contains("1430"));
        assert!(report.contains("suppressed"));
    }
}
