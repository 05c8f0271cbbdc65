use std::ffi::{CStr, CString};
use std::ptr;

use looming::{default_params, normalize, Pipeline, PipelineOptions, Scenario};
use looming_ffi::*;

fn gray(f: &looming::Field) -> Vec<u8> {
    f.as_slice().iter().map(|&v| v as u8).collect()
}

fn last_error() -> String {
    let p = looming_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn matches_the_core_pipeline() {
    let frames: Vec<_> = Scenario::looming_disk()
        .generate()
        .unwrap()
        .frames
        .into_iter()
        .take(30)
        .collect();
    let normalized: Vec<_> = frames.iter().map(normalize).collect();
    let reference = Pipeline::new(default_params(), PipelineOptions::default())
        .unwrap()
        .run(normalized.iter())
        .unwrap();

    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(
            looming_pipeline_new(128, 128, false, &mut h),
            LoomingStatus::Ok
        );
        let first = gray(&frames[0]);
        assert_eq!(
            looming_pipeline_prime(h, first.as_ptr(), first.len()),
            LoomingStatus::Ok
        );
        for (f, want) in frames[1..].iter().zip(&reference) {
            let g = gray(f);
            let mut r = LoomingFrameReport::default();
            assert_eq!(
                looming_pipeline_step(h, g.as_ptr(), g.len(), &mut r),
                LoomingStatus::Ok
            );
            assert_eq!(r.t, want.t);
            assert_eq!(r.u.to_bits(), want.u.to_bits());
            assert_eq!((r.spike, r.collision), (want.spike, want.collision));
            assert_eq!(r.n_targets, want.targets.len());

            let mut n = 0;
            let mut buf = vec![LoomingTarget::default(); r.n_targets];
            assert_eq!(
                looming_pipeline_targets(h, buf.as_mut_ptr(), buf.len(), &mut n),
                LoomingStatus::Ok
            );
            assert_eq!(n, want.targets.len());
            for (got, t) in buf.iter().zip(&want.targets) {
                assert_eq!((got.x, got.y, got.n_points), (t.x, t.y, t.member_count));
            }
        }
        assert_eq!(looming_pipeline_frame_index(h), 30);
        looming_pipeline_free(h);
    }
}

#[test]
fn protocol_errors_have_codes_and_messages() {
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(looming_pipeline_new(8, 8, false, &mut h), LoomingStatus::Ok);
        let frame = [100u8; 64];
        let mut r = LoomingFrameReport::default();
        assert_eq!(
            looming_pipeline_step(h, frame.as_ptr(), 64, &mut r),
            LoomingStatus::NotPrimed
        );
        assert!(last_error().contains("not primed"));
        assert_eq!(
            looming_pipeline_prime(h, frame.as_ptr(), 63),
            LoomingStatus::DimensionMismatch
        );
        assert_eq!(
            looming_pipeline_prime(h, frame.as_ptr(), 64),
            LoomingStatus::Ok
        );
        assert!(looming_last_error().is_null());
        assert_eq!(
            looming_pipeline_prime(h, frame.as_ptr(), 64),
            LoomingStatus::AlreadyPrimed
        );
        assert_eq!(
            looming_pipeline_step(h, frame.as_ptr(), 64, &mut r),
            LoomingStatus::Ok
        );
        assert_eq!((r.u, r.out, r.collision), (0.0, 0.5, false));
        assert_eq!(
            looming_pipeline_step(h, ptr::null(), 64, &mut r),
            LoomingStatus::NullPointer
        );
        looming_pipeline_free(h);
        looming_pipeline_free(ptr::null_mut());
    }
}

#[test]
fn config_parsing_and_validation() {
    let mut h = ptr::null_mut();
    unsafe {
        let good = CString::new("frame_width = 16\nframe_height = 12\ntop_k = 2\n").unwrap();
        assert_eq!(
            looming_pipeline_from_config(good.as_ptr(), true, &mut h),
            LoomingStatus::Ok
        );
        let frame = [0u8; 16 * 12];
        assert_eq!(
            looming_pipeline_prime(h, frame.as_ptr(), frame.len()),
            LoomingStatus::Ok
        );
        looming_pipeline_free(h);

        let bad = CString::new("top_k = 99\n").unwrap();
        assert_eq!(
            looming_pipeline_from_config(bad.as_ptr(), false, &mut h),
            LoomingStatus::InvalidParams
        );
        assert!(h.is_null());
        assert!(last_error().contains("top_k"));

        let garbled = CString::new("top_k 2\n").unwrap();
        assert_eq!(
            looming_pipeline_from_config(garbled.as_ptr(), false, &mut h),
            LoomingStatus::ParseError
        );
        assert_eq!(
            looming_pipeline_from_config(ptr::null(), false, &mut h),
            LoomingStatus::NullPointer
        );
        assert_eq!(
            looming_pipeline_new(0, 8, false, &mut h),
            LoomingStatus::InvalidParams
        );
    }
}

#[test]
fn target_buffer_too_small() {
    let frames = Scenario::looming_disk().generate().unwrap().frames;
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(
            looming_pipeline_new(128, 128, false, &mut h),
            LoomingStatus::Ok
        );
        let g = gray(&frames[0]);
        looming_pipeline_prime(h, g.as_ptr(), g.len());
        let mut r = LoomingFrameReport::default();
        for f in &frames[1..25] {
            let g = gray(f);
            looming_pipeline_step(h, g.as_ptr(), g.len(), &mut r);
        }
        assert!(r.n_targets > 0);
        let mut n = 0;
        assert_eq!(
            looming_pipeline_targets(h, ptr::null_mut(), 0, &mut n),
            LoomingStatus::BufferTooSmall
        );
        assert_eq!(n, r.n_targets);
        looming_pipeline_free(h);
    }
}

#[test]
fn status_names() {
    let name = |s| {
        unsafe { CStr::from_ptr(looming_status_name(s)) }
            .to_str()
            .unwrap()
    };
    assert_eq!(name(LoomingStatus::Ok), "ok");
    assert_eq!(name(LoomingStatus::BufferTooSmall), "buffer too small");
}
