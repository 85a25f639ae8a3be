use autograd::Rng;
use imageops::*;

fn main() {
    // Synthesize a mucosa-like frame: pinkish base, dark red blob, noise.
    let (w, h) = (64usize, 64usize);
    let mut rng = Rng::new(2026);
    let mut img = ImageU8::new(w, h, 3);
    let mut mask = MaskPlane::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let n = rng.range(-14.0, 14.0);
            let (mut r, mut g, mut b) = (185.0 + n, 120.0 + n, 110.0 + n);
            let dx = x as f64 - 40.0;
            let dy = y as f64 - 28.0;
            if (dx / 9.0).powi(2) + (dy / 6.0).powi(2) <= 1.0 {
                r = 120.0 + n; g = 18.0 + n; b = 22.0 + n;
                mask.set(x, y, 1);
            }
            img.set(x, y, 0, clamp_u8(r));
            img.set(x, y, 1, clamp_u8(g));
            img.set(x, y, 2, clamp_u8(b));
        }
    }
    write_ppm("/root/crate/tmp-drive/raw.ppm", &img).unwrap();

    let pre = preprocess(&img, &PreprocessConfig::default()).unwrap();
    write_ppm("/root/crate/tmp-drive/pre.ppm", &pre).unwrap();

    let (bx0, by0, bx1, by1) = mask.bounding_box().unwrap();
    let sample = LabeledSample {
        image: pre.clone(),
        class_probs: [0.0, 1.0],
        boxes: vec![BoxAnnotation::from_corners(
            bx0 as f64 / w as f64, by0 as f64 / h as f64,
            bx1 as f64 / w as f64, by1 as f64 / h as f64,
        )],
        mask: Some(mask),
    };
    let cfg = AugmentConfig { seed: 7, ..Default::default() };
    for index in [0u64, 1, 2] {
        let draw = sample_augment(&cfg, index);
        let out = apply_augment(&sample, &draw).unwrap();
        write_ppm(&format!("/root/crate/tmp-drive/aug{index}.ppm"), &out.image).unwrap();
        let mb = out.mask.as_ref().unwrap().bounding_box();
        println!("draw {index}: hflip={} vflip={} rot={:.1} scale={:.3} blur={}",
                 draw.hflip, draw.vflip, draw.rot_degrees, draw.scale, draw.blur);
        println!("  boxes={:?}", out.boxes.iter().map(|b| b.corners_px(w, h)).collect::<Vec<_>>());
        println!("  mask bbox={mb:?} ones={}", out.mask.as_ref().unwrap().count_ones());
    }

    // Round trip the preprocessed frame through disk.
    let back = read_ppm("/root/crate/tmp-drive/pre.ppm").unwrap();
    assert_eq!(back, pre);
    let means_raw = img.channel_means();
    let means_pre = pre.channel_means();
    println!("raw means  R={:.1} G={:.1} B={:.1}", means_raw[0], means_raw[1], means_raw[2]);
    println!("pre means  R={:.1} G={:.1} B={:.1}", means_pre[0], means_pre[1], means_pre[2]);
    println!("disk round trip exact: ok");
}
