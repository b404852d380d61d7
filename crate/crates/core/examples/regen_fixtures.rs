//! Regenerates the pinned instance fixtures under tests/data/ and prints
//! their content hashes. The acceptance tests assert these hashes, so any
//! regeneration that changes bytes must update them together.

use std::fs;
use std::path::PathBuf;

use hmis::gen::{generate, InstanceKind};

fn fnv64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn main() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    fs::create_dir_all(&dir).unwrap();
    let mut table = Vec::new();

    // Small instances for the stored deterministic reduction runs.
    let det_specs: [(u32, usize, usize, u64); 20] = [
        (6, 8, 2, 101),
        (7, 9, 2, 102),
        (8, 10, 2, 103),
        (8, 12, 3, 104),
        (9, 12, 3, 105),
        (9, 14, 3, 106),
        (10, 12, 3, 107),
        (10, 14, 3, 108),
        (10, 10, 2, 109),
        (8, 9, 3, 110),
        (7, 10, 3, 111),
        (9, 10, 2, 112),
        (10, 13, 3, 113),
        (8, 11, 2, 114),
        (9, 13, 3, 115),
        (10, 11, 3, 116),
        (7, 8, 2, 117),
        (8, 13, 3, 118),
        (9, 11, 2, 119),
        (10, 14, 2, 120),
    ];
    for (i, (n, m, r, seed)) in det_specs.iter().enumerate() {
        let g = generate(InstanceKind::UniformRandom, *n, *m, *r, *seed).unwrap();
        let name = format!("det{:02}.json", i + 1);
        let json = g.to_canonical_json();
        fs::write(dir.join(&name), &json).unwrap();
        table.push((name, fnv64(json.as_bytes())));
    }

    // Edge-heavy instances for the deterministic sparse loop.
    let sparse_specs: [(u32, usize, usize, u64); 6] = [
        (20, 40, 3, 201),
        (24, 60, 3, 202),
        (30, 80, 3, 203),
        (30, 120, 4, 204),
        (40, 120, 3, 205),
        (40, 160, 4, 206),
    ];
    for (i, (n, m, r, seed)) in sparse_specs.iter().enumerate() {
        let g = generate(InstanceKind::PlantedSparse, *n, *m, *r, *seed).unwrap();
        let name = format!("sparse{:02}.json", i + 1);
        let json = g.to_canonical_json();
        fs::write(dir.join(&name), &json).unwrap();
        table.push((name, fnv64(json.as_bytes())));
    }

    // Mid-size instances for migration measurements.
    let rand_specs: [(u32, usize, usize, u64); 5] = [
        (16, 20, 3, 301),
        (20, 28, 3, 302),
        (24, 36, 4, 303),
        (20, 24, 4, 304),
        (24, 30, 3, 305),
    ];
    for (i, (n, m, r, seed)) in rand_specs.iter().enumerate() {
        let g = generate(InstanceKind::UniformRandom, *n, *m, *r, *seed).unwrap();
        let name = format!("rand{:02}.json", i + 1);
        let json = g.to_canonical_json();
        fs::write(dir.join(&name), &json).unwrap();
        table.push((name, fnv64(json.as_bytes())));
    }

    // The pinned generator reference output.
    let g = generate(InstanceKind::UniformRandom, 30, 40, 3, 7).unwrap();
    let json = g.to_canonical_json();
    fs::write(dir.join("golden_uniform_n30_m40_r3_seed7.json"), &json).unwrap();
    table.push(("golden_uniform_n30_m40_r3_seed7.json".into(), fnv64(json.as_bytes())));

    for (name, hash) in table {
        println!("(\"{name}\", 0x{hash:016x}),");
    }
}
