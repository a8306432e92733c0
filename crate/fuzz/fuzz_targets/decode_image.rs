#![no_main]

use gcp_denoise::codec::decode_image;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(img) = decode_image(data) {
        assert_eq!(img.channels(), 3);
        assert!(img.data().iter().all(|v| (0.0..=255.0).contains(v)));
    }
});
