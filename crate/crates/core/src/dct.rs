//! Block DCT machinery: forward/inverse transforms, the anti-diagonal
//! high-frequency mask, the block-adaptive threshold, the adaptive DCT
//! loss, its frozen-selection gradient, and the derived coefficient
//! filter used as a deterministic preprocessor.
//!
//! Conventions:
//! - `Orthonormal` is the standard orthonormal DCT-II (invertible,
//!   Parseval holds). `PaperRaw` is the plain unnormalized cosine sum;
//!   the two differ per coefficient by the fixed positive factor
//!   `c(h)·c(w)` with `c(0)=sqrt(1/N)`, `c(k)=sqrt(2/N)`.
//! - The threshold divides by `N*N` by default (a `MaskedCount` variant
//!   is available), selection uses strict `|F| < T`, and the frame loss
//!   is the block mean by default (a `Sum` variant is available).
//! - Summation order is fixed (row-major, plain accumulation) so results
//!   are reproducible bit-for-bit.

use crate::error::{Error, Result};
use crate::frame::{Frame, PixelFormat, Plane};

/// Coefficients below this magnitude are treated as numerical noise by the
/// filter (never by the loss): zeroing them would only re-inject round-trip
/// noise into otherwise untouched blocks.
const FILTER_NOISE_FLOOR: f64 = 1e-12;

/// Forward-transform normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Orthonormal DCT-II; invertible, energy-preserving.
    #[default]
    Orthonormal,
    /// Literal unnormalized cosine sum. Forward-only.
    PaperRaw,
}

/// Divisor used when turning the masked-coefficient sum into the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdDivisor {
    /// Divide by N*N (the written form of the threshold definition).
    #[default]
    FullBlock,
    /// Divide by the number of masked positions (true masked mean).
    MaskedCount,
}

/// How per-block losses combine into the frame loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockReduction {
    /// Mean over blocks (default).
    #[default]
    Mean,
    /// Plain sum over blocks.
    Sum,
}

/// Configuration for one block size.
///
/// The default evaluation setting uses both N=8 and N=16 and averages the
/// two frame losses; see [`DctConfig::default_pair`] and the `_multi`
/// operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DctConfig {
    n: usize,
    s: usize,
    pub normalization: Normalization,
    pub divisor: ThresholdDivisor,
    pub reduction: BlockReduction,
}

impl Default for DctConfig {
    fn default() -> Self {
        DctConfig::new(8, 8).unwrap()
    }
}

impl DctConfig {
    /// Block size `n` in {4, 8, 16, 32}, diagonal threshold `s` in `[0, 2n-2]`.
    pub fn new(n: usize, s: usize) -> Result<Self> {
        if !matches!(n, 4 | 8 | 16 | 32) {
            return Err(Error::Config(format!(
                "block size must be one of 4, 8, 16, 32 (got {n})"
            )));
        }
        if s > 2 * n - 2 {
            return Err(Error::Config(format!(
                "diagonal threshold {s} out of range [0, {}] for N={n}",
                2 * n - 2
            )));
        }
        Ok(DctConfig {
            n,
            s,
            normalization: Normalization::default(),
            divisor: ThresholdDivisor::default(),
            reduction: BlockReduction::default(),
        })
    }

    /// Block size `n` with the default diagonal threshold S = N.
    pub fn with_block_size(n: usize) -> Result<Self> {
        DctConfig::new(n, n)
    }

    /// The paper-default pair: N=8 and N=16, each with S=N.
    pub fn default_pair() -> Vec<DctConfig> {
        vec![
            DctConfig::with_block_size(8).unwrap(),
            DctConfig::with_block_size(16).unwrap(),
        ]
    }

    pub fn block_size(&self) -> usize {
        self.n
    }

    pub fn diagonal_threshold(&self) -> usize {
        self.s
    }

    pub fn normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn threshold_divisor(mut self, divisor: ThresholdDivisor) -> Self {
        self.divisor = divisor;
        self
    }

    pub fn block_reduction(mut self, reduction: BlockReduction) -> Self {
        self.reduction = reduction;
        self
    }
}

/// One N x N tile of spatial samples with its grid position.
#[derive(Debug, Clone)]
pub struct Block {
    pub n: usize,
    pub block_row: usize,
    pub block_col: usize,
    pub data: Vec<f64>,
}

/// N x N DCT coefficients for one block.
#[derive(Debug, Clone)]
pub struct BlockSpectrum {
    pub n: usize,
    pub block_row: usize,
    pub block_col: usize,
    pub coeffs: Vec<f64>,
}

impl BlockSpectrum {
    #[inline]
    pub fn coeff(&self, h: usize, w: usize) -> f64 {
        self.coeffs[h * self.n + w]
    }
}

/// Binary anti-diagonal mask: position (h, w) is set iff h + w >= S.
#[derive(Debug, Clone)]
pub struct FrequencyMask {
    pub n: usize,
    pub s: usize,
    mask: Vec<bool>,
}

impl FrequencyMask {
    #[inline]
    pub fn is_set(&self, h: usize, w: usize) -> bool {
        self.mask[h * self.n + w]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }
}

/// Build the high-frequency selection mask for a config.
pub fn high_freq_mask(config: &DctConfig) -> FrequencyMask {
    let n = config.n;
    let mut mask = vec![false; n * n];
    for h in 0..n {
        for w in 0..n {
            mask[h * n + w] = h + w >= config.s;
        }
    }
    FrequencyMask {
        n,
        s: config.s,
        mask,
    }
}

/// Separable cosine basis, cached per transform call site.
struct DctBasis {
    n: usize,
    /// Row-major matrix M[k][i]; orthonormal carries the c(k) scale,
    /// raw is the bare cosine.
    mat: Vec<f64>,
}

impl DctBasis {
    fn new(n: usize, normalization: Normalization) -> Self {
        let mut mat = vec![0.0; n * n];
        for k in 0..n {
            let scale = match normalization {
                Normalization::Orthonormal => {
                    if k == 0 {
                        (1.0 / n as f64).sqrt()
                    } else {
                        (2.0 / n as f64).sqrt()
                    }
                }
                Normalization::PaperRaw => 1.0,
            };
            for i in 0..n {
                let angle = std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2 * n) as f64;
                mat[k * n + i] = scale * angle.cos();
            }
        }
        DctBasis { n, mat }
    }

    /// F = M * X * M^T
    fn forward(&self, spatial: &[f64]) -> Vec<f64> {
        let n = self.n;
        let m = &self.mat;
        // t = X * M^T : t[i][w] = sum_j X[i][j] * M[w][j]
        let mut t = vec![0.0; n * n];
        for i in 0..n {
            for w in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += spatial[i * n + j] * m[w * n + j];
                }
                t[i * n + w] = acc;
            }
        }
        // F = M * t : F[h][w] = sum_i M[h][i] * t[i][w]
        let mut f = vec![0.0; n * n];
        for h in 0..n {
            for w in 0..n {
                let mut acc = 0.0;
                for i in 0..n {
                    acc += m[h * n + i] * t[i * n + w];
                }
                f[h * n + w] = acc;
            }
        }
        f
    }

    /// X = M^T * F * M (the adjoint; for the orthonormal basis this is the
    /// exact inverse).
    fn adjoint(&self, coeffs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let m = &self.mat;
        // t[i][w] = sum_h M[h][i] * F[h][w]
        let mut t = vec![0.0; n * n];
        for i in 0..n {
            for w in 0..n {
                let mut acc = 0.0;
                for h in 0..n {
                    acc += m[h * n + i] * coeffs[h * n + w];
                }
                t[i * n + w] = acc;
            }
        }
        // X[i][j] = sum_w t[i][w] * M[w][j]
        let mut x = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for w in 0..n {
                    acc += t[i * n + w] * m[w * n + j];
                }
                x[i * n + j] = acc;
            }
        }
        x
    }
}

/// Forward 2-D DCT of one block under the config's normalization.
pub fn dct2d_forward(block: &Block, config: &DctConfig) -> Result<BlockSpectrum> {
    if block.n != config.n || block.data.len() != config.n * config.n {
        return Err(Error::Contract(format!(
            "block is {}x{} but config expects {}x{}",
            block.n, block.n, config.n, config.n
        )));
    }
    if block.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract("block contains non-finite samples".into()));
    }
    let basis = DctBasis::new(config.n, config.normalization);
    Ok(BlockSpectrum {
        n: config.n,
        block_row: block.block_row,
        block_col: block.block_col,
        coeffs: basis.forward(&block.data),
    })
}

/// Inverse 2-D DCT. Orthonormal only; the raw basis is not self-inverting.
pub fn dct2d_inverse(spectrum: &BlockSpectrum, config: &DctConfig) -> Result<Block> {
    if config.normalization != Normalization::Orthonormal {
        return Err(Error::Contract(
            "inverse transform requires orthonormal normalization".into(),
        ));
    }
    if spectrum.n != config.n {
        return Err(Error::Contract(format!(
            "spectrum is {}x{} but config expects {}x{}",
            spectrum.n, spectrum.n, config.n, config.n
        )));
    }
    let basis = DctBasis::new(config.n, Normalization::Orthonormal);
    Ok(Block {
        n: config.n,
        block_row: spectrum.block_row,
        block_col: spectrum.block_col,
        data: basis.adjoint(&spectrum.coeffs),
    })
}

/// Block-adaptive threshold: the masked absolute sum over the divisor
/// (N*N as written, or the masked count with the `MaskedCount` variant).
pub fn adaptive_threshold(
    spectrum: &BlockSpectrum,
    mask: &FrequencyMask,
    config: &DctConfig,
) -> f64 {
    debug_assert_eq!(spectrum.n, mask.n);
    let n = spectrum.n;
    let mut acc = 0.0;
    for idx in 0..n * n {
        if mask.mask[idx] {
            acc += spectrum.coeffs[idx].abs();
        }
    }
    let divisor = match config.divisor {
        ThresholdDivisor::FullBlock => (n * n) as f64,
        ThresholdDivisor::MaskedCount => mask.count().max(1) as f64,
    };
    acc / divisor
}

/// Per-block outcome of the loss: threshold, selected positions (masked
/// positions whose magnitude is strictly below the threshold) with the
/// sign of each selected coefficient, and the block's loss contribution.
#[derive(Debug, Clone)]
pub struct BlockLossDetail {
    pub block_row: usize,
    pub block_col: usize,
    pub threshold: f64,
    pub selected: Vec<(usize, usize)>,
    pub selected_signs: Vec<i8>,
    pub block_loss: f64,
}

/// Loss of one frame under one config, with per-block details.
#[derive(Debug, Clone)]
pub struct LossReport {
    pub config: DctConfig,
    pub blocks: Vec<BlockLossDetail>,
    pub loss: f64,
}

fn block_loss_detail(
    spectrum: &BlockSpectrum,
    mask: &FrequencyMask,
    config: &DctConfig,
) -> BlockLossDetail {
    let n = spectrum.n;
    let threshold = adaptive_threshold(spectrum, mask, config);
    let mut selected = Vec::new();
    let mut signs = Vec::new();
    let mut block_loss = 0.0;
    for h in 0..n {
        for w in 0..n {
            let idx = h * n + w;
            if mask.mask[idx] {
                let v = spectrum.coeffs[idx];
                if v.abs() < threshold {
                    selected.push((h, w));
                    signs.push(if v > 0.0 {
                        1
                    } else if v < 0.0 {
                        -1
                    } else {
                        0
                    });
                    block_loss += v.abs();
                }
            }
        }
    }
    BlockLossDetail {
        block_row: spectrum.block_row,
        block_col: spectrum.block_col,
        threshold,
        selected,
        selected_signs: signs,
        block_loss,
    }
}

fn require_gray(frame: &Frame, what: &str) -> Result<()> {
    if frame.format() != PixelFormat::Gray {
        return Err(Error::Contract(format!(
            "{what} operates on gray frames; convert with to_luma first"
        )));
    }
    Ok(())
}

fn require_min_dims(frame: &Frame, n: usize) -> Result<()> {
    if frame.width() < n || frame.height() < n {
        return Err(Error::Contract(format!(
            "frame {}x{} is smaller than the {n}x{n} block size",
            frame.width(),
            frame.height()
        )));
    }
    Ok(())
}

/// Adaptive DCT loss of a gray frame under one config.
pub fn adaptive_dct_loss(frame: &Frame, config: &DctConfig) -> Result<f64> {
    Ok(adaptive_dct_loss_report(frame, config)?.loss)
}

/// Loss averaged over several configs (the paper-default pair is N=8, N=16).
pub fn adaptive_dct_loss_multi(frame: &Frame, configs: &[DctConfig]) -> Result<f64> {
    if configs.is_empty() {
        return Err(Error::Config("at least one DCT config is required".into()));
    }
    let mut sum = 0.0;
    for config in configs {
        sum += adaptive_dct_loss(frame, config)?;
    }
    Ok(sum / configs.len() as f64)
}

/// Loss with per-block thresholds and selection sets exposed.
pub fn adaptive_dct_loss_report(frame: &Frame, config: &DctConfig) -> Result<LossReport> {
    require_gray(frame, "adaptive_dct_loss")?;
    require_min_dims(frame, config.n)?;
    let grid = blockize(frame.plane(0), config.n);
    let basis = DctBasis::new(config.n, config.normalization);
    let mask = high_freq_mask(config);
    let mut blocks = Vec::with_capacity(grid.blocks.len());
    let mut sum = 0.0;
    for block in &grid.blocks {
        let spectrum = BlockSpectrum {
            n: config.n,
            block_row: block.block_row,
            block_col: block.block_col,
            coeffs: basis.forward(&block.data),
        };
        let detail = block_loss_detail(&spectrum, &mask, config);
        sum += detail.block_loss;
        blocks.push(detail);
    }
    let loss = match config.reduction {
        BlockReduction::Mean => sum / grid.blocks.len() as f64,
        BlockReduction::Sum => sum,
    };
    Ok(LossReport {
        config: *config,
        blocks,
        loss,
    })
}

/// Frozen-selection subgradient of the loss with respect to the pixels.
///
/// The selection set (mask, threshold comparison, and sign pattern) is
/// treated as constant, which makes the loss linear in the pixels: the
/// gradient of one block is the adjoint transform of the sign pattern
/// placed at the selected positions, scaled by the block reduction.
/// Selected coefficients below the numerical noise floor contribute a
/// zero subgradient (their sign is an artifact of finite precision).
/// Returned row-major with the frame's dimensions.
pub fn adaptive_dct_loss_grad(frame: &Frame, config: &DctConfig) -> Result<Vec<f64>> {
    require_gray(frame, "adaptive_dct_loss_grad")?;
    require_min_dims(frame, config.n)?;
    let n = config.n;
    let plane = frame.plane(0);
    let grid = blockize(plane, n);
    let basis = DctBasis::new(n, config.normalization);
    let mask = high_freq_mask(config);
    let scale = match config.reduction {
        BlockReduction::Mean => 1.0 / grid.blocks.len() as f64,
        BlockReduction::Sum => 1.0,
    };

    // Gradient over the padded canvas, then folded back onto the source
    // pixels (a replicated edge pixel accumulates every padded position
    // it fed).
    let (pw, ph) = (grid.cols * n, grid.rows * n);
    let mut padded = vec![0.0; pw * ph];
    let mut sign_grid = vec![0.0; n * n];
    for block in &grid.blocks {
        let coeffs = basis.forward(&block.data);
        let spectrum = BlockSpectrum {
            n,
            block_row: block.block_row,
            block_col: block.block_col,
            coeffs,
        };
        let detail = block_loss_detail(&spectrum, &mask, config);
        if detail.selected.is_empty() {
            continue;
        }
        sign_grid.iter_mut().for_each(|v| *v = 0.0);
        for (&(h, w), &sg) in detail.selected.iter().zip(&detail.selected_signs) {
            if spectrum.coeff(h, w).abs() >= FILTER_NOISE_FLOOR {
                sign_grid[h * n + w] = f64::from(sg);
            }
        }
        let g = basis.adjoint(&sign_grid);
        let (y0, x0) = (block.block_row * n, block.block_col * n);
        for i in 0..n {
            for j in 0..n {
                padded[(y0 + i) * pw + (x0 + j)] += scale * g[i * n + j];
            }
        }
    }

    let (w, h) = (plane.width, plane.height);
    let mut grad = vec![0.0; w * h];
    for y in 0..ph {
        let sy = y.min(h - 1);
        for x in 0..pw {
            let sx = x.min(w - 1);
            grad[sy * w + sx] += padded[y * pw + x];
        }
    }
    Ok(grad)
}

/// Multi-config gradient: mean of the per-config gradients.
pub fn adaptive_dct_loss_grad_multi(frame: &Frame, configs: &[DctConfig]) -> Result<Vec<f64>> {
    if configs.is_empty() {
        return Err(Error::Config("at least one DCT config is required".into()));
    }
    let mut acc = vec![0.0; frame.width() * frame.height()];
    for config in configs {
        let g = adaptive_dct_loss_grad(frame, config)?;
        for (a, v) in acc.iter_mut().zip(g) {
            *a += v;
        }
    }
    let k = 1.0 / configs.len() as f64;
    for a in &mut acc {
        *a *= k;
    }
    Ok(acc)
}

/// Scale the selected (sub-threshold high-frequency) coefficients of every
/// block by `1 - strength`; `strength = 1` zeroes them, which is the exact
/// minimizer of the loss under the frozen selection.
///
/// The reconstruction subtracts the inverse transform of the removed
/// coefficient mass from the input block, so untouched blocks stay
/// bit-identical. Blocks whose selected coefficients are all below the
/// numerical noise floor are skipped. Output is clamped to `[0,1]`.
pub fn adaptive_dct_filter(frame: &Frame, config: &DctConfig, strength: f64) -> Result<Frame> {
    require_gray(frame, "adaptive_dct_filter")?;
    require_min_dims(frame, config.n)?;
    if !(0.0..=1.0).contains(&strength) {
        return Err(Error::Contract(format!(
            "filter strength {strength} outside [0,1]"
        )));
    }
    if config.normalization != Normalization::Orthonormal {
        return Err(Error::Contract(
            "the filter needs the invertible orthonormal transform".into(),
        ));
    }
    if strength == 0.0 {
        return Ok(frame.clone());
    }

    let n = config.n;
    let plane = frame.plane(0);
    let grid = blockize(plane, n);
    let basis = DctBasis::new(n, Normalization::Orthonormal);
    let mask = high_freq_mask(config);

    let mut out_blocks = Vec::with_capacity(grid.blocks.len());
    let mut delta_spec = vec![0.0; n * n];
    for block in &grid.blocks {
        let coeffs = basis.forward(&block.data);
        let spectrum = BlockSpectrum {
            n,
            block_row: block.block_row,
            block_col: block.block_col,
            coeffs,
        };
        let detail = block_loss_detail(&spectrum, &mask, config);
        let significant = detail
            .selected
            .iter()
            .any(|&(h, w)| spectrum.coeff(h, w).abs() >= FILTER_NOISE_FLOOR);
        if !significant {
            out_blocks.push(block.clone());
            continue;
        }
        delta_spec.iter_mut().for_each(|v| *v = 0.0);
        for &(h, w) in &detail.selected {
            delta_spec[h * n + w] = strength * spectrum.coeff(h, w);
        }
        let delta = basis.adjoint(&delta_spec);
        let mut data = block.data.clone();
        for (d, r) in data.iter_mut().zip(&delta) {
            *d = (*d - r).clamp(0.0, 1.0);
        }
        out_blocks.push(Block {
            n,
            block_row: block.block_row,
            block_col: block.block_col,
            data,
        });
    }

    let out_grid = BlockGrid {
        n,
        rows: grid.rows,
        cols: grid.cols,
        src_width: grid.src_width,
        src_height: grid.src_height,
        blocks: out_blocks,
    };
    Ok(Frame::gray_clamped(unblockize(&out_grid)))
}

/// Sequential multi-config filtering, applied in the order given
/// (the default pair runs N=8 first, then N=16).
pub fn adaptive_dct_filter_multi(
    frame: &Frame,
    configs: &[DctConfig],
    strength: f64,
) -> Result<Frame> {
    if configs.is_empty() {
        return Err(Error::Config("at least one DCT config is required".into()));
    }
    let mut out = frame.clone();
    for config in configs {
        out = adaptive_dct_filter(&out, config, strength)?;
    }
    Ok(out)
}

/// Filter an arbitrary frame: gray frames directly, the luma plane of YUV
/// frames (chroma passthrough), and each plane of RGB frames.
pub fn adaptive_dct_filter_frame(
    frame: &Frame,
    configs: &[DctConfig],
    strength: f64,
) -> Result<Frame> {
    match frame.format() {
        PixelFormat::Gray => adaptive_dct_filter_multi(frame, configs, strength),
        PixelFormat::Yuv420 => {
            let luma = Frame::gray(frame.width(), frame.height(), frame.plane(0).data.clone())?;
            let filtered = adaptive_dct_filter_multi(&luma, configs, strength)?;
            frame.with_plane(0, filtered.plane(0).clone())
        }
        PixelFormat::Rgb => {
            let mut out = frame.clone();
            for i in 0..3 {
                let plane =
                    Frame::gray(frame.width(), frame.height(), frame.plane(i).data.clone())?;
                let filtered = adaptive_dct_filter_multi(&plane, configs, strength)?;
                out = out.with_plane(i, filtered.plane(0).clone())?;
            }
            Ok(out)
        }
    }
}

/// Non-overlapping N x N tiling of a plane with its grid geometry.
#[derive(Debug, Clone)]
pub struct BlockGrid {
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    pub src_width: usize,
    pub src_height: usize,
    pub blocks: Vec<Block>,
}

/// Tile a plane into N x N blocks, edge-replicating up to the next
/// multiple of N when the dimensions do not divide evenly.
pub fn blockize(plane: &Plane, n: usize) -> BlockGrid {
    let cols = plane.width.div_ceil(n);
    let rows = plane.height.div_ceil(n);
    let mut blocks = Vec::with_capacity(rows * cols);
    for br in 0..rows {
        for bc in 0..cols {
            let mut data = Vec::with_capacity(n * n);
            for i in 0..n {
                let y = (br * n + i).min(plane.height - 1);
                for j in 0..n {
                    let x = (bc * n + j).min(plane.width - 1);
                    data.push(plane.data[y * plane.width + x]);
                }
            }
            blocks.push(Block {
                n,
                block_row: br,
                block_col: bc,
                data,
            });
        }
    }
    BlockGrid {
        n,
        rows,
        cols,
        src_width: plane.width,
        src_height: plane.height,
        blocks,
    }
}

/// Reassemble a plane from blocks, keyed by each block's grid position,
/// cropping away the padding.
pub fn unblockize(grid: &BlockGrid) -> Plane {
    let n = grid.n;
    let (pw, ph) = (grid.cols * n, grid.rows * n);
    let mut canvas = vec![0.0; pw * ph];
    for block in &grid.blocks {
        let (y0, x0) = (block.block_row * n, block.block_col * n);
        for i in 0..n {
            for j in 0..n {
                canvas[(y0 + i) * pw + (x0 + j)] = block.data[i * n + j];
            }
        }
    }
    let mut data = Vec::with_capacity(grid.src_width * grid.src_height);
    for y in 0..grid.src_height {
        data.extend_from_slice(&canvas[y * pw..y * pw + grid.src_width]);
    }
    Plane {
        width: grid.src_width,
        height: grid.src_height,
        data,
    }
}
