#![no_main]

use gcp_denoise::codec::{decode_ppm, encode_ppm};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(r) = decode_ppm(data) {
        assert_eq!(r.data.len(), r.width * r.height * 3);
        // anything we accept must survive a re-encode
        let again = decode_ppm(&encode_ppm(&r).unwrap()).unwrap();
        assert_eq!(again, r);
    }
});
