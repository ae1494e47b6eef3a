use std::io::{self, BufRead, Write};

/// Grid values at one time, stored row-major as `values[j (nx + 1) + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub t: f64,
    pub values: Vec<f64>,
}

impl Snapshot {
    pub fn node(&self, i: usize, j: usize) -> f64 {
        self.values[j * (self.nx + 1) + i]
    }

    /// Bilinear interpolation, clamped to the rectangle.
    pub fn value_at(&self, x: f64, y: f64) -> f64 {
        let locate = |p: f64, n: usize| {
            let s = (p / self.h).clamp(0.0, n as f64);
            let i = (s.floor() as usize).min(n - 1);
            (i, s - i as f64)
        };
        let (i, fx) = locate(x, self.nx);
        let (j, fy) = locate(y, self.ny);
        let lo = self.node(i, j) * (1.0 - fx) + self.node(i + 1, j) * fx;
        let hi = self.node(i, j + 1) * (1.0 - fx) + self.node(i + 1, j + 1) * fx;
        lo * (1.0 - fy) + hi * fy
    }

    /// Text header `nx ny h t` on one line, then little-endian `f64` values.
    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{} {} {:e} {:e}", self.nx, self.ny, self.h, self.t)?;
        for v in &self.values {
            out.write_all(&v.to_le_bytes())?;
        }
        out.flush()
    }

    pub fn read_from<R: BufRead>(mut input: R) -> io::Result<Self> {
        let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
        let mut header = String::new();
        input.read_line(&mut header)?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(bad("snapshot header must read `nx ny h t`"));
        }
        let nx: usize = fields[0].parse().map_err(|_| bad("bad nx"))?;
        let ny: usize = fields[1].parse().map_err(|_| bad("bad ny"))?;
        let h: f64 = fields[2].parse().map_err(|_| bad("bad h"))?;
        let t: f64 = fields[3].parse().map_err(|_| bad("bad t"))?;
        let count = (nx + 1) * (ny + 1);
        let mut bytes = vec![0u8; count * 8];
        input.read_exact(&mut bytes)?;
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of eight bytes")))
            .collect();
        Ok(Self {
            nx,
            ny,
            h,
            t,
            values,
        })
    }

    /// Linear interpolation in time between two snapshots on the same grid.
    pub fn lerp(a: &Snapshot, b: &Snapshot, t: f64) -> Snapshot {
        let w = if b.t > a.t {
            ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        Snapshot {
            nx: a.nx,
            ny: a.ny,
            h: a.h,
            t,
            values: a
                .values
                .iter()
                .zip(&b.values)
                .map(|(x, y)| x + w * (y - x))
                .collect(),
        }
    }
}
