#![no_main]

use gcp_denoise::codec::decode_png;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(r) = decode_png(data) {
        assert_eq!(r.channels, 3);
        assert_eq!(r.data.len(), r.width * r.height * 3);
    }
});
