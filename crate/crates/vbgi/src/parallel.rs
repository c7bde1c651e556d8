//! Row-band threading for the per-pixel passes. Every pass maps a pure
//! function over pixels, so the output is the same Vec no matter how many
//! workers ran it.

/// Turns a configured worker count into an actual one; 0 asks the OS.
pub fn resolve_threads(requested: usize) -> usize {
    if requested > 0 {
        requested
    } else {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    }
}

/// Evaluates `f` at every pixel, returning results in row-major order.
/// Rows are split into contiguous bands, one scoped worker per band.
pub fn map_pixels<T, F>(width: u32, height: u32, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u32, u32) -> T + Sync,
{
    let (w, h) = (width as usize, height as usize);
    let threads = resolve_threads(threads).min(h.max(1));
    if threads <= 1 {
        let mut out = Vec::with_capacity(w * h);
        for y in 0..height {
            for x in 0..width {
                out.push(f(x, y));
            }
        }
        return out;
    }

    let band = h.div_ceil(threads);
    let mut bands: Vec<Vec<T>> = Vec::with_capacity(threads);
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(threads);
        for b in 0..threads {
            let y0 = b * band;
            let y1 = ((b + 1) * band).min(h);
            if y0 >= y1 {
                break;
            }
            let f = &f;
            handles.push(scope.spawn(move || {
                let mut part = Vec::with_capacity(w * (y1 - y0));
                for y in y0..y1 {
                    for x in 0..width {
                        part.push(f(x, y as u32));
                    }
                }
                part
            }));
        }
        for handle in handles {
            bands.push(handle.join().expect("render worker panicked"));
        }
    });
    let mut out = Vec::with_capacity(w * h);
    for mut part in bands {
        out.append(&mut part);
    }
    out
}
