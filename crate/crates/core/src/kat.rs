//! Known-answer vectors for AES-128.

use crate::aes::{Aes128, Key128, BLOCK_LEN};

#[derive(Debug, Clone, Copy)]
pub struct KnownAnswer {
    pub name: &'static str,
    pub key: &'static str,
    pub plaintext: &'static str,
    pub ciphertext: &'static str,
}

pub const VECTORS: &[KnownAnswer] = &[
    KnownAnswer {
        name: "FIPS-197 C.1",
        key: "000102030405060708090a0b0c0d0e0f",
        plaintext: "00112233445566778899aabbccddeeff",
        ciphertext: "69c4e0d86a7b0430d8cdb78070b4c55a",
    },
    KnownAnswer {
        name: "FIPS-197 B",
        key: "2b7e151628aed2a6abf7158809cf4f3c",
        plaintext: "3243f6a8885a308d313198a2e0370734",
        ciphertext: "3925841d02dc09fbdc118597196a0b32",
    },
    KnownAnswer {
        name: "SP 800-38A F.1.1 block 1",
        key: "2b7e151628aed2a6abf7158809cf4f3c",
        plaintext: "6bc1bee22e409f96e93d7e117393172a",
        ciphertext: "3ad77bb40d7a3660a89ecaf32466ef97",
    },
    KnownAnswer {
        name: "SP 800-38A F.1.1 block 2",
        key: "2b7e151628aed2a6abf7158809cf4f3c",
        plaintext: "ae2d8a571e03ac9c9eb76fac45af8e51",
        ciphertext: "f5d3d58503b9699de785895a96fdbaaf",
    },
    KnownAnswer {
        name: "SP 800-38A F.1.1 block 3",
        key: "2b7e151628aed2a6abf7158809cf4f3c",
        plaintext: "30c81c46a35ce411e5fbc1191a0a52ef",
        ciphertext: "43b1cd7f598ece23881b00e3ed030688",
    },
    KnownAnswer {
        name: "SP 800-38A F.1.1 block 4",
        key: "2b7e151628aed2a6abf7158809cf4f3c",
        plaintext: "f69f2445df4f9b17ad2b417be66c3710",
        ciphertext: "7b0c785e27e8ad3f8223207104725dd4",
    },
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KatFailure {
    pub name: &'static str,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KatOutcome {
    pub total: usize,
    pub failures: Vec<KatFailure>,
}

impl KatOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn unhex16(s: &str) -> [u8; BLOCK_LEN] {
    let v = hex::decode(s).expect("vector table holds valid hex");
    v.try_into().expect("vector table holds 16-byte values")
}

/// Runs every vector through `make_cipher`, which builds the cipher under test.
pub fn run_suite_with(make_cipher: impl Fn(&Key128) -> Aes128) -> KatOutcome {
    let failures = VECTORS
        .iter()
        .filter_map(|v| {
            let cipher = make_cipher(&Key128(unhex16(v.key)));
            let actual = hex::encode(cipher.encrypt_block(&unhex16(v.plaintext)));
            (actual != v.ciphertext).then(|| KatFailure {
                name: v.name,
                expected: v.ciphertext.to_string(),
                actual,
            })
        })
        .collect();
    KatOutcome {
        total: VECTORS.len(),
        failures,
    }
}

pub fn run_suite() -> KatOutcome {
    run_suite_with(Aes128::new)
}
