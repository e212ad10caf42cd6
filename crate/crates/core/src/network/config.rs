use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Architecture of the spectral-spatial network.
///
/// Each convolutional layer is a valid (unpadded) unit-stride 3D convolution, so every axis
/// shrinks by `kernel_extent - 1` per layer. At the defaults with 200 bands the feature stacks
/// are `[7,7,200] -> [5,5,198] -> [3,3,196] -> [1,1,194]`, 24 maps each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub patch_width: usize,
    pub patch_height: usize,
    pub bands: usize,
    pub num_conv_layers: usize,
    pub kernels_per_layer: usize,
    pub kernel_extent: usize,
    pub dense_widths: Vec<usize>,
    pub num_classes: usize,
    /// Index kernels by input channel (standard multi-channel convolution) instead of sharing
    /// one kernel across every input map.
    pub per_channel_kernels: bool,
}

impl NetworkConfig {
    /// The default architecture for a scene with `bands` bands and `num_classes` classes.
    pub fn new(bands: usize, num_classes: usize) -> Self {
        Self {
            patch_width: 7,
            patch_height: 7,
            bands,
            num_conv_layers: 3,
            kernels_per_layer: 24,
            kernel_extent: 3,
            dense_widths: vec![512, 256, 128],
            num_classes,
            per_channel_kernels: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.num_classes < 2 {
            return bad(format!("num_classes must be >= 2, got {}", self.num_classes));
        }
        if self.kernel_extent == 0 || self.kernels_per_layer == 0 {
            return bad("kernel_extent and kernels_per_layer must be positive".into());
        }
        if self.patch_width == 0 || self.patch_height == 0 || self.bands == 0 {
            return bad("patch extents and bands must be positive".into());
        }
        if self.dense_widths.iter().any(|&w| w == 0) {
            return bad("dense widths must be positive".into());
        }
        let shrink = self.num_conv_layers * (self.kernel_extent - 1);
        for (name, extent) in
            [("patch_width", self.patch_width), ("patch_height", self.patch_height), ("bands", self.bands)]
        {
            if extent <= shrink {
                return bad(format!(
                    "{name} = {extent} does not survive {} convolutions of extent {}",
                    self.num_conv_layers, self.kernel_extent
                ));
            }
        }
        Ok(())
    }

    /// `(channels, x, y, bands)` of the input and of every convolution output.
    pub fn conv_shapes(&self) -> Vec<[usize; 4]> {
        let shrink = self.kernel_extent - 1;
        (0..=self.num_conv_layers)
            .map(|l| {
                let c = if l == 0 { 1 } else { self.kernels_per_layer };
                [c, self.patch_width - l * shrink, self.patch_height - l * shrink, self.bands - l * shrink]
            })
            .collect()
    }

    pub fn flatten_len(&self) -> usize {
        self.conv_shapes().last().map(|s| s.iter().product()).unwrap_or(0)
    }

    /// `(in_features, out_features)` of every dense layer, output layer last.
    pub fn dense_shapes(&self) -> Vec<(usize, usize)> {
        let mut widths = vec![self.flatten_len()];
        widths.extend(&self.dense_widths);
        widths.push(self.num_classes);
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn conv_param_count(&self, in_channels: usize) -> usize {
        let k3 = self.kernel_extent.pow(3);
        let per_kernel = if self.per_channel_kernels { k3 * in_channels } else { k3 };
        self.kernels_per_layer * per_kernel + self.kernels_per_layer
    }

    pub fn param_count(&self) -> usize {
        let conv: usize = self.conv_shapes()[..self.num_conv_layers]
            .iter()
            .map(|s| self.conv_param_count(s[0]))
            .sum();
        let dense: usize = self.dense_shapes().iter().map(|(i, o)| i * o + o).sum();
        conv + dense
    }

    /// Canonical `key=value` text, one key per line in a fixed order.
    pub fn to_canonical_text(&self) -> String {
        let widths: Vec<String> = self.dense_widths.iter().map(ToString::to_string).collect();
        format!(
            "patch_width={}\npatch_height={}\nbands={}\nnum_conv_layers={}\nkernels_per_layer={}\n\
             kernel_extent={}\ndense_widths={}\nnum_classes={}\nper_channel_kernels={}\n",
            self.patch_width,
            self.patch_height,
            self.bands,
            self.num_conv_layers,
            self.kernels_per_layer,
            self.kernel_extent,
            widths.join(","),
            self.num_classes,
            self.per_channel_kernels
        )
    }

    pub fn from_canonical_text(text: &str) -> Result<Self> {
        const KEYS: [&str; 9] = [
            "patch_width",
            "patch_height",
            "bands",
            "num_conv_layers",
            "kernels_per_layer",
            "kernel_extent",
            "dense_widths",
            "num_classes",
            "per_channel_kernels",
        ];
        let lines: Vec<&str> = text.lines().collect();
        if lines.len() != KEYS.len() {
            return Err(Error::Format(format!("expected {} config lines, got {}", KEYS.len(), lines.len())));
        }
        let mut values = Vec::with_capacity(KEYS.len());
        for (line, key) in lines.iter().zip(KEYS) {
            match line.split_once('=') {
                Some((k, v)) if k == key => values.push(v),
                _ => return Err(Error::Format(format!("expected `{key}=...`, got `{line}`"))),
            }
        }
        let int = |i: usize| -> Result<usize> {
            values[i].parse().map_err(|_| Error::Format(format!("bad integer for {}: {}", KEYS[i], values[i])))
        };
        let dense_widths = if values[6].is_empty() {
            Vec::new()
        } else {
            values[6]
                .split(',')
                .map(|w| w.parse().map_err(|_| Error::Format(format!("bad dense width `{w}`"))))
                .collect::<Result<_>>()?
        };
        let per_channel_kernels = match values[8] {
            "true" => true,
            "false" => false,
            other => return Err(Error::Format(format!("bad boolean `{other}`"))),
        };
        let cfg = Self {
            patch_width: int(0)?,
            patch_height: int(1)?,
            bands: int(2)?,
            num_conv_layers: int(3)?,
            kernels_per_layer: int(4)?,
            kernel_extent: int(5)?,
            dense_widths,
            num_classes: int(7)?,
            per_channel_kernels,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
