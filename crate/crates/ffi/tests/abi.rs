use std::ffi::CStr;
use std::ptr;

use ebhotelling::multiplicity::bh_select;
use ebhotelling::sim::{gen_model_dataset, SimConfig};
use ebhotelling_ffi::*;

// genes x (replicates * conditions), replicate-major rows
fn flat_model_data(genes: usize) -> (Vec<f64>, usize, usize) {
    let cfg = SimConfig {
        genes,
        true_positives: genes / 10,
        ..SimConfig::paper_model()
    };
    let ds = gen_model_dataset(&cfg, 0).unwrap();
    let (n, d) = (cfg.replicates, cfg.dim);
    let mut values = Vec::new();
    for s in &ds.samples {
        values.extend_from_slice(s.obs().as_slice());
    }
    (values, n, d)
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ebh_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn fit_test_select_round_trip() {
    let (mut values, n, d) = flat_model_data(500);
    // gene 3 keeps one complete replicate only
    values[3 * n * d] = f64::NAN;
    values[3 * n * d + d] = f64::NAN;
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(
            ebh_dataset_new(values.as_ptr(), 500, n, d, &mut ds),
            EbhStatus::Ok
        );
        assert_eq!(ebh_dataset_len(ds), 499);

        let mut prior = ptr::null_mut();
        assert_eq!(
            ebh_fit_wishart(ds, EBH_H0_ZERO_MEANS, &mut prior),
            EbhStatus::Ok
        );
        assert!(ebh_prior_converged(prior));
        assert_eq!(ebh_prior_dim(prior), 2);
        let (mut nu, mut lambda) = (0.0, [0.0; 4]);
        assert_eq!(
            ebh_prior_wishart_params(prior, &mut nu, lambda.as_mut_ptr(), 4),
            EbhStatus::Ok
        );
        assert!(nu > 4.0 && lambda[1] == lambda[2]);
        let (mut rate, mut shape) = (0.0, 0.0);
        assert_eq!(
            ebh_prior_simple_params(prior, &mut rate, &mut shape),
            EbhStatus::InvalidArgument
        );

        let mut res = ptr::null_mut();
        assert_eq!(
            ebh_test(ds, prior, EBH_METHOD_SHHT2, EBH_H0_ZERO_MEANS, &mut res),
            EbhStatus::Ok
        );
        assert_eq!(ebh_results_len(res), 500);
        let mut p = vec![0.0; 500];
        assert_eq!(ebh_results_pvalues(res, p.as_mut_ptr(), 500), EbhStatus::Ok);
        assert!(p[3].is_nan());
        let (mut stat, mut df1, mut df2, mut pv) = (0.0, 0.0, 0.0, 0.0);
        assert_eq!(
            ebh_results_get(res, 0, &mut stat, &mut df1, &mut df2, &mut pv),
            EbhStatus::Ok
        );
        assert_eq!((df1, pv), (2.0, p[0]));
        assert!((df2 - (nu + 3.0 - 4.0 - 1.0)).abs() < 1e-12);

        let mut mask = vec![0u8; 500];
        assert_eq!(
            ebh_bh_select(p.as_ptr(), 500, 0.05, mask.as_mut_ptr()),
            EbhStatus::Ok
        );
        let expected = bh_select(&p, 0.05).unwrap();
        assert!(mask.iter().zip(&expected).all(|(&m, &e)| (m == 1) == e));
        assert!(mask.iter().filter(|&&m| m == 1).count() > 0);

        // a prior fitted under another hypothesis is refused
        let mut other = ptr::null_mut();
        assert_eq!(
            ebh_test(ds, prior, EBH_METHOD_SHHT2, EBH_H0_EQUAL_MEANS, &mut other),
            EbhStatus::InvalidArgument
        );
        assert!(other.is_null());
        assert!(last_error().contains("different hypothesis"));

        ebh_results_free(res);
        ebh_prior_free(prior);
        ebh_dataset_free(ds);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(
            ebh_dataset_new(ptr::null(), 3, 3, 2, &mut ds),
            EbhStatus::NullPointer
        );
        assert!(ds.is_null());
        assert!(last_error().contains("values"));

        let mut prior = ptr::null_mut();
        let lambda = [1.0, 2.0, 2.0, 1.0];
        assert_eq!(
            ebh_prior_new_wishart(lambda.as_ptr(), 2, 8.0, EBH_H0_ZERO_MEANS, &mut prior),
            EbhStatus::NotPositiveDefinite
        );
        let mut theta = 0.0;
        assert_eq!(
            ebh_solve_theta(0.001, 0.05, 6.0, 4.0, 3.0, &mut theta),
            EbhStatus::NoRoot
        );
        assert_eq!(
            ebh_solve_theta(0.9, 0.0026, 6.0, 4.0, 3.0, &mut theta),
            EbhStatus::Ok
        );
        assert!(theta > 0.0);
        assert_eq!(
            ebh_bh_select(ptr::null(), 0, 0.1, ptr::null_mut()),
            EbhStatus::Ok
        );
        assert_eq!(
            ebh_bh_select([0.1].as_ptr(), 1, 1.5, [0u8].as_mut_ptr()),
            EbhStatus::InvalidArgument
        );

        // few genes cannot support a fit
        let (values, n, d) = flat_model_data(10);
        assert_eq!(
            ebh_dataset_new(values.as_ptr(), 10, n, d, &mut ds),
            EbhStatus::Ok
        );
        assert_eq!(
            ebh_fit_simple(ds, EBH_H0_ZERO_MEANS, &mut prior),
            EbhStatus::Inadmissible
        );
        assert_eq!(
            ebh_fit_wishart(ds, 9, &mut prior),
            EbhStatus::InvalidArgument
        );
        let mut res = ptr::null_mut();
        assert_eq!(
            ebh_test(
                ds,
                ptr::null(),
                EBH_METHOD_SHHT2,
                EBH_H0_ZERO_MEANS,
                &mut res
            ),
            EbhStatus::InvalidArgument
        );
        assert_eq!(
            ebh_test(ds, ptr::null(), EBH_METHOD_HT2, EBH_H0_ZERO_MEANS, &mut res),
            EbhStatus::Ok
        );
        assert_eq!(ebh_results_len(res), 10);
        ebh_results_free(res);
        ebh_dataset_free(ds);
        assert!(!CStr::from_ptr(ebh_version()).to_bytes().is_empty());
    }
}

#[test]
fn header_lists_the_entry_points() {
    let header = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/include/ebhotelling.h"
    ))
    .unwrap();
    for f in [
        "ebh_dataset_new",
        "ebh_fit_wishart",
        "ebh_test",
        "ebh_bh_select",
        "ebh_solve_theta",
        "ebh_last_error_message",
        "EBH_STATUS_OK",
    ] {
        assert!(header.contains(f), "{f} missing from header");
    }
}
