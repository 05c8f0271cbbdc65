use std::fs;

use looming::io::{write_frames, FrameDir};
use looming::{Error, Scenario};

#[test]
fn generated_frames_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = Scenario::looming_disk();
    s.steps = 12;
    s.approach = (3, 6);
    s.recede = (8, 11);
    let frames = s.generate().unwrap().frames;
    write_frames(dir.path(), &frames).unwrap();
    let back: Vec<_> = FrameDir::open(dir.path())
        .unwrap()
        .raw()
        .collect::<Result<_, _>>()
        .unwrap();
    assert_eq!(back, frames);
}

#[test]
fn three_frames_three_items() {
    let dir = tempfile::tempdir().unwrap();
    let f = Scenario::looming_disk().frame(1);
    write_frames(dir.path(), &[f.clone(), f.clone(), f]).unwrap();
    let d = FrameDir::open(dir.path()).unwrap();
    assert_eq!(d.len(), 3);
    let norm: Vec<_> = d.normalized().collect::<Result<_, _>>().unwrap();
    assert!(norm.iter().all(|f| f.max() <= 1.0 && f.min() >= 0.0));
}

#[test]
fn gap_in_numbering_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let f = Scenario::looming_disk().frame(1);
    write_frames(dir.path(), &[f.clone(), f.clone(), f]).unwrap();
    fs::remove_file(dir.path().join("frame_0002.pgm")).unwrap();
    assert!(matches!(
        FrameDir::open(dir.path()),
        Err(Error::NumberingGap {
            expected: 2,
            found: 3
        })
    ));
}

#[test]
fn sixteen_bit_frames_are_unsupported() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = b"P5\n2 2\n65535\n".to_vec();
    bytes.extend_from_slice(&[0; 8]);
    fs::write(dir.path().join("frame_0001.pgm"), bytes).unwrap();
    let d = FrameDir::open(dir.path()).unwrap();
    let err = d.raw().next().unwrap().unwrap_err();
    assert!(matches!(err, Error::Unsupported { .. }), "{err}");
}

#[test]
fn mixed_sizes_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let a = looming::Field::zeros(8, 8);
    let b = looming::Field::zeros(8, 9);
    write_frames(dir.path(), &[a, b]).unwrap();
    let res: Result<Vec<_>, _> = FrameDir::open(dir.path()).unwrap().raw().collect();
    assert!(matches!(res, Err(Error::Format { .. })));
}
