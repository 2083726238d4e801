use super::Keypoint;
use crate::image::{GrayImage, ImageBuffer};

/// Keypoints closer than this to any image edge get no descriptor.
pub const DESCRIPTOR_MARGIN: usize = 16;

/// Sample offsets stay within ±13 px; with the 5x5 smoothing box the patch
/// spans 31x31 pixels.
const SAMPLE_RADIUS: i64 = 13;
const BOX_RADIUS: i64 = 2;

const PAIR_SEED: u64 = 0x5EED_B41E_F256_0001;

const fn splitmix(state: u64) -> (u64, u64) {
    let s = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = s;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (s, z ^ (z >> 31))
}

/// Roughly Gaussian offset (sum of two uniforms) clipped to the sample radius.
const fn draw_offset(state: u64) -> (u64, i8) {
    let span = (2 * SAMPLE_RADIUS + 1) as u64;
    let (s1, a) = splitmix(state);
    let (s2, b) = splitmix(s1);
    let v = (a % span) as i64 + (b % span) as i64 - 2 * SAMPLE_RADIUS;
    // v in [-26, 26]; halve toward zero to land in [-13, 13].
    (s2, (v / 2) as i8)
}

const fn build_pairs() -> [[i8; 4]; 256] {
    let mut pairs = [[0i8; 4]; 256];
    let mut state = PAIR_SEED;
    let mut i = 0;
    while i < 256 {
        let mut p = [0i8; 4];
        let mut j = 0;
        while j < 4 {
            let (s, v) = draw_offset(state);
            state = s;
            p[j] = v;
            j += 1;
        }
        // A pair comparing a point with itself carries no information.
        if p[0] != p[2] || p[1] != p[3] {
            pairs[i] = p;
            i += 1;
        }
    }
    pairs
}

/// Fixed sampling table `[dx1, dy1, dx2, dy2]`, generated at compile time.
pub(crate) static SAMPLING_PAIRS: [[i8; 4]; 256] = build_pairs();

/// 256-bit BRIEF descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BinaryDescriptor(pub [u8; 32]);

impl BinaryDescriptor {
    pub fn hamming(&self, other: &BinaryDescriptor) -> u32 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Described {
    pub descriptors: Vec<BinaryDescriptor>,
    /// `kept[i]` is the input keypoint index that `descriptors[i]` belongs to.
    pub kept: Vec<usize>,
}

struct Integral {
    w: usize,
    sums: Vec<u32>,
}

impl Integral {
    fn new(g: &GrayImage) -> Self {
        let w = g.width + 1;
        let mut sums = vec![0u32; w * (g.height + 1)];
        for y in 0..g.height {
            let mut row = 0u32;
            for x in 0..g.width {
                row += g.at(x, y) as u32;
                sums[(y + 1) * w + x + 1] = sums[y * w + x + 1] + row;
            }
        }
        Self { w, sums }
    }

    /// Sum over the box of radius `BOX_RADIUS` centred on (x, y).
    fn box_sum(&self, x: i64, y: i64) -> u32 {
        let x0 = (x - BOX_RADIUS) as usize;
        let y0 = (y - BOX_RADIUS) as usize;
        let x1 = (x + BOX_RADIUS + 1) as usize;
        let y1 = (y + BOX_RADIUS + 1) as usize;
        self.sums[y1 * self.w + x1] + self.sums[y0 * self.w + x0]
            - self.sums[y0 * self.w + x1]
            - self.sums[y1 * self.w + x0]
    }
}

/// BRIEF-256 descriptors for every keypoint at least `DESCRIPTOR_MARGIN`
/// pixels from the border; the rest are dropped and `kept` records the mapping.
pub fn describe(image: &ImageBuffer, keypoints: &[Keypoint]) -> Described {
    let gray = image.to_luma();
    let integral = Integral::new(&gray);
    let (w, h) = (gray.width as i64, gray.height as i64);
    let m = DESCRIPTOR_MARGIN as i64;
    let mut out = Described::default();
    for (idx, kp) in keypoints.iter().enumerate() {
        let x = kp.position.x.round() as i64;
        let y = kp.position.y.round() as i64;
        if x < m || y < m || x > w - 1 - m || y > h - 1 - m {
            continue;
        }
        let mut bits = [0u8; 32];
        for (i, p) in SAMPLING_PAIRS.iter().enumerate() {
            let a = integral.box_sum(x + p[0] as i64, y + p[1] as i64);
            let b = integral.box_sum(x + p[2] as i64, y + p[3] as i64);
            if a < b {
                bits[i / 8] |= 1 << (i % 8);
            }
        }
        out.descriptors.push(BinaryDescriptor(bits));
        out.kept.push(idx);
    }
    out
}
