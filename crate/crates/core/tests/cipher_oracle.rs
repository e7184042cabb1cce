//! The from-scratch cipher against the RustCrypto `aes` crate, used here only
//! as an independent reference (including decryption for fault checks).

use aes::cipher::{generic_array::GenericArray, BlockDecrypt, BlockEncrypt, KeyInit};
use aeslab::aes::{aes128_encrypt_block, Key128};
use aeslab::cipher::run_pipeline;
use aeslab::workload::{build_schedule, AnomalyKinds, InputDistribution, RunConfig, TimingMode};
use proptest::prelude::*;

fn reference_encrypt(key: &[u8; 16], block: &[u8; 16]) -> [u8; 16] {
    let cipher = aes::Aes128::new(GenericArray::from_slice(key));
    let mut b = GenericArray::clone_from_slice(block);
    cipher.encrypt_block(&mut b);
    b.into()
}

fn reference_decrypt(key: &[u8; 16], block: &[u8; 16]) -> [u8; 16] {
    let cipher = aes::Aes128::new(GenericArray::from_slice(key));
    let mut b = GenericArray::clone_from_slice(block);
    cipher.decrypt_block(&mut b);
    b.into()
}

proptest! {
    #[test]
    fn agrees_with_reference(key in any::<[u8; 16]>(), block in any::<[u8; 16]>()) {
        let ours = aes128_encrypt_block(&block, &Key128(key)).unwrap();
        prop_assert_eq!(ours, reference_encrypt(&key, &block));
    }
}

#[test]
fn faults_are_observable_after_reference_decryption() {
    let key = Key128::from_hex("2b7e151628aed2a6abf7158809cf4f3c").unwrap();
    let cfg = RunConfig {
        n_blocks: 2000,
        inject_pct: 50.0,
        seed: 21,
        mode: TimingMode::Simulated,
        input_dist: InputDistribution::UniformRandom,
        anomaly_kinds: AnomalyKinds::Both,
        ..RunConfig::default()
    };
    let generated = build_schedule(&cfg).unwrap();
    let records = run_pipeline(&cfg, &key).unwrap();
    let mut faults = 0;
    for (g, r) in generated.iter().zip(&records) {
        assert_eq!(g.index, r.index);
        let decrypted = reference_decrypt(&key.0, &r.ciphertext);
        assert_eq!(decrypted, r.plaintext_effective);
        if r.tag.is_fault() {
            faults += 1;
            assert_eq!(decrypted[0], g.bytes[0] ^ 0xff);
            assert_eq!(decrypted[1..], g.bytes[1..]);
        } else {
            assert_eq!(decrypted, g.bytes);
        }
    }
    assert!(faults > 300);
}

#[test]
fn equal_plaintexts_encrypt_equally_across_indices() {
    let key = Key128::default();
    let block = [0x33u8; 16];
    let a = aes128_encrypt_block(&block, &key).unwrap();
    let b = aes128_encrypt_block(&block, &key).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, reference_encrypt(&key.0, &block));
}
