use sqg_stationary::fft2::Fft2;
use std::time::Instant;

fn main() {
    for &n in &[2048usize, 4096, 8192] {
        let samples: Vec<f64> = (0..n * n).map(|t| ((t % 977) as f64).sin()).collect();
        let t0 = Instant::now();
        let spec = Fft2::forward(n, &samples);
        let t1 = t0.elapsed();
        let t0 = Instant::now();
        let back = Fft2::inverse(n, &spec);
        let t2 = t0.elapsed();
        let err = samples.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        println!("n={n}: forward {t1:?}, inverse {t2:?}, roundtrip_err {err:.3e}");
    }
    // padded synthesis 4096 -> 8192 (the norm-evaluation hot path)
    let n = 4096usize;
    let samples: Vec<f64> = (0..n * n).map(|t| ((t % 977) as f64).sin()).collect();
    let spec = Fft2::forward(n, &samples);
    let t0 = Instant::now();
    let fine = Fft2::synthesize(n, &spec, 8192);
    println!("synthesize 4096->8192: {:?} ({})", t0.elapsed(), fine[7]);
}
