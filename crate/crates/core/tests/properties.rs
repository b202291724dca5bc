use proptest::prelude::*;

use shotqrng::bounds::{lower_bound_per_sample, RandomnessReport};
use shotqrng::dist::{general_skellam_pmf, poisson_pmf, skellam_pmf, Pmf};
use shotqrng::entropy::{min_entropy, quantize, shannon_entropy, AdcParams};
use shotqrng::sim::RawTrace;
use shotqrng::specfun::{log_bessel_i_scaled, log_sum_exp, LogValue};

const EPS: f64 = 1e-12;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn log_sum_exp_ignores_order(xs in prop::collection::vec(-50.0f64..50.0, 1..40), seed in any::<u64>()) {
        let vals: Vec<LogValue> = xs.iter().map(|&x| LogValue::new(x).unwrap()).collect();
        let mut shuffled = vals.clone();
        let n = shuffled.len();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let a = log_sum_exp(&vals).ln();
        let b = log_sum_exp(&shuffled).ln();
        prop_assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0));
        let naive = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        prop_assert!((a - naive).abs() <= 1e-12 * naive.abs().max(1.0));
    }

    #[test]
    fn bessel_three_term_recurrence(j in 1i64..=100, logz in 0.0f64..(1e4f64).ln()) {
        // I_{j-1}(z) - I_{j+1}(z) = (2j / z) I_j(z), divided through by I_j
        let z = logz.exp();
        let mid = log_bessel_i_scaled(j, z).unwrap().ln();
        let lower = (log_bessel_i_scaled(j - 1, z).unwrap().ln() - mid).exp();
        let upper = (log_bessel_i_scaled(j + 1, z).unwrap().ln() - mid).exp();
        let rhs = 2.0 * j as f64 / z;
        prop_assert!((lower - upper - rhs).abs() <= 1e-9 * lower.max(rhs), "j={j} z={z}");
    }

    #[test]
    fn bessel_decreases_in_order(j in 0i64..2000, z in 1e-3f64..1e5) {
        let a = log_bessel_i_scaled(j, z).unwrap();
        let b = log_bessel_i_scaled(j + 1, z).unwrap();
        prop_assert!(b.ln() < a.ln());
    }

    #[test]
    fn pmfs_are_normalized(mu in 0.0f64..2000.0) {
        for pmf in [skellam_pmf(mu, EPS).unwrap(), poisson_pmf(mu, EPS).unwrap()] {
            prop_assert!(pmf.tail_mass_bound() <= EPS);
            prop_assert!((pmf.total_mass() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn general_skellam_is_normalized(mu1 in 0.0f64..500.0, mu2 in 0.0f64..500.0) {
        let pmf = general_skellam_pmf(mu1, mu2, EPS).unwrap();
        prop_assert!((pmf.total_mass() - 1.0).abs() <= 1e-9);
        prop_assert!((pmf.mean() - (mu1 - mu2)).abs() <= 1e-7 * (1.0 + mu1 + mu2));
        prop_assert!((pmf.variance() - (mu1 + mu2)).abs() <= 1e-7 * (1.0 + mu1 + mu2));
    }

    #[test]
    fn skellam_is_symmetric_with_mode_at_zero(mu in 0.0f64..5000.0) {
        let pmf = skellam_pmf(mu, EPS).unwrap();
        for j in pmf.support() {
            prop_assert_eq!(pmf.log_prob(j), pmf.log_prob(-j));
        }
        // brute-force maximum over the window sits at the center
        let best = pmf.iter().map(|(_, p)| p).fold(0.0, f64::max);
        prop_assert_eq!(best, pmf.prob(0));
        prop_assert!((min_entropy(&pmf) + pmf.prob(0).log2()).abs() < 1e-12);
    }

    #[test]
    fn entropy_orderings(mu in 0.01f64..1000.0) {
        let p = skellam_pmf(mu, EPS).unwrap();
        let h = shannon_entropy(&p).bits;
        prop_assert!(min_entropy(&p) <= h + 1e-12);
        // coarsening: a/k = 9 bins are unions of a/k = 3 bins, which are unions of integers
        let q3 = quantize(&p, &AdcParams::with_resolution(3.0).unwrap()).unwrap();
        let q9 = quantize(&p, &AdcParams::with_resolution(9.0).unwrap()).unwrap();
        let h3 = shannon_entropy(&q3).bits;
        let h9 = shannon_entropy(&q9).bits;
        prop_assert!(h9 <= h3 + 1e-12 && h3 <= h + 1e-12, "{h9} {h3} {h}");
        prop_assert!(q3.is_normalized(1e-9) && q9.is_normalized(1e-9));
    }

    #[test]
    fn report_bounds_are_ordered(mu in 0.0f64..3000.0, r in 0.1f64..20.0) {
        let adc = AdcParams::with_resolution(r).unwrap();
        let rep = RandomnessReport::per_sample(mu, &adc, EPS).unwrap();
        prop_assert!(rep.is_ordered(), "{rep:?}");
        prop_assert!(rep.r1_bits <= 2.0 * rep.r0_bits + 1e-12);
        prop_assert!(rep.r_lower_bits >= 0.0);
    }

    #[test]
    fn adc_codes_are_monotone_and_bounded(a in 0.05f64..10.0, k in 0.05f64..10.0, bits in 2u32..=16, offset in -0.5f64..0.5) {
        let adc = AdcParams::symmetric(a, k, bits).unwrap().with_offset(offset).unwrap();
        let (lo, hi) = adc.code_bounds();
        let mut prev = i64::MIN;
        for count in -2000i64..=2000 {
            let c = adc.code_for_count(count);
            prop_assert!(c >= prev && (lo..=hi).contains(&c));
            prev = c;
        }
    }

    #[test]
    fn pmf_serialization_round_trips(mu in 0.0f64..300.0) {
        let pmf = skellam_pmf(mu, EPS).unwrap();
        let back = Pmf::from_json(&pmf.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &pmf);
        let mut buf = Vec::new();
        pmf.write_csv(&mut buf).unwrap();
        let from_csv = Pmf::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(from_csv.support(), pmf.support());
        for j in pmf.support() {
            prop_assert!((from_csv.prob(j) - pmf.prob(j)).abs() <= 1e-15 * pmf.prob(j).max(1e-300));
        }
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn trace_files_round_trip(codes in prop::collection::vec(0u32..256, 0..500), bits in 8u32..=24, seed in proptest::option::of(any::<u64>())) {
        let adc = AdcParams::symmetric(0.7, 0.3, bits).unwrap();
        let trace = RawTrace::new(codes, adc, 2.5e9, seed, "proptest").unwrap();
        let mut bin = Vec::new();
        trace.write_binary(&mut bin).unwrap();
        prop_assert_eq!(&RawTrace::read_binary(bin.as_slice()).unwrap(), &trace);
        let mut csv = Vec::new();
        trace.write_csv(&mut csv).unwrap();
        prop_assert_eq!(&RawTrace::read_csv(csv.as_slice()).unwrap(), &trace);
    }
}

#[test]
fn vanishing_signal_gives_vanishing_lower_bound() {
    let adc = AdcParams::with_resolution(1.0).unwrap();
    let r = lower_bound_per_sample(1e-6, &adc, EPS).unwrap();
    assert!(r >= 0.0 && r < 1e-4, "{r}");
    assert_eq!(lower_bound_per_sample(0.0, &adc, EPS).unwrap(), 0.0);
}
