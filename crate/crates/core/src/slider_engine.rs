//! Virtual slider geometry and the absolute touch-to-level mapping.
//!
//! The pad's x axis is split into five equal bands separated by four dead
//! gaps; each band drives one light channel. The y axis is quantized into
//! `level_count` intensity steps, larger y (by default) being brighter.
//! Positions are absolute: a touch sets the level under the finger, it never
//! nudges it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame_codec::{TouchSample, COORD_MAX};
use crate::light_model::{ChannelId, LightCommand, CHANNEL_COUNT, LEVEL_MAX};

pub const SLIDER_COUNT: usize = CHANNEL_COUNT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliderLayout {
    pub band_width: u16,
    pub gap_width: u16,
    pub level_count: u8,
    /// When set, y = 0 is the top of the pad.
    pub y_inverted: bool,
}

impl Default for SliderLayout {
    fn default() -> Self {
        Self {
            band_width: 1024,
            gap_width: 256,
            level_count: LEVEL_MAX + 1,
            y_inverted: false,
        }
    }
}

impl SliderLayout {
    pub const SLIDER_COUNT: usize = SLIDER_COUNT;
    pub const X_MAX: u16 = COORD_MAX;
    pub const Y_MAX: u16 = COORD_MAX;

    pub fn new(band_width: u16, gap_width: u16, level_count: u8, y_inverted: bool) -> Result<Self> {
        let layout = Self {
            band_width,
            gap_width,
            level_count,
            y_inverted,
        };
        layout.validate()?;
        Ok(layout)
    }

    /// Bands and gaps must tile `0..=X_MAX` exactly, and every level must
    /// be expressible as a light command.
    pub fn validate(&self) -> Result<()> {
        let span = SLIDER_COUNT as u32 * u32::from(self.band_width)
            + (SLIDER_COUNT as u32 - 1) * u32::from(self.gap_width);
        if self.band_width == 0 {
            return Err(Error::Layout("band width must be positive".into()));
        }
        if span != u32::from(Self::X_MAX) + 1 {
            return Err(Error::Layout(format!(
                "{SLIDER_COUNT} x {} + {} x {} = {span}, must equal {}",
                self.band_width,
                SLIDER_COUNT - 1,
                self.gap_width,
                u32::from(Self::X_MAX) + 1
            )));
        }
        if !(2..=LEVEL_MAX + 1).contains(&self.level_count) {
            return Err(Error::Layout(format!(
                "level count {} outside 2..={}",
                self.level_count,
                LEVEL_MAX + 1
            )));
        }
        Ok(())
    }

    fn pitch(&self) -> u16 {
        self.band_width + self.gap_width
    }

    /// Inclusive x interval covered by band `index`.
    pub fn band_range(&self, index: usize) -> std::ops::RangeInclusive<u16> {
        let start = index as u16 * self.pitch();
        start..=start + self.band_width - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SliderHit {
    Band(u8),
    Gap,
}

pub fn locate_slider(x: u16, layout: &SliderLayout) -> Result<SliderHit> {
    if x > SliderLayout::X_MAX {
        return Err(Error::range("x", x, SliderLayout::X_MAX));
    }
    let pitch = layout.pitch();
    if x % pitch < layout.band_width {
        Ok(SliderHit::Band((x / pitch) as u8))
    } else {
        Ok(SliderHit::Gap)
    }
}

/// `floor(y' * level_count / (Y_MAX + 1))`, with `y'` flipped when the
/// layout is inverted.
pub fn quantize_level(y: u16, layout: &SliderLayout) -> Result<u8> {
    if y > SliderLayout::Y_MAX {
        return Err(Error::range("y", y, SliderLayout::Y_MAX));
    }
    let y = if layout.y_inverted {
        SliderLayout::Y_MAX - y
    } else {
        y
    };
    let level = u32::from(y) * u32::from(layout.level_count) / (u32::from(SliderLayout::Y_MAX) + 1);
    Ok(level as u8)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Minimum pressure for a sample to count as a deliberate touch.
    pub z_threshold: u8,
    pub layout: SliderLayout,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            z_threshold: 30,
            layout: SliderLayout::default(),
        }
    }
}

/// A single channel moving to a new level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelChange {
    pub channel: ChannelId,
    pub level: u8,
}

impl From<ChannelChange> for LightCommand {
    fn from(c: ChannelChange) -> Self {
        LightCommand {
            channel: c.channel,
            level: c.level,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct EngineState {
    pub levels: [u8; SLIDER_COUNT],
}

impl EngineState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        self.levels = [0; SLIDER_COUNT];
    }

    /// Applies one touch. Lifted fingers, light touches and gap hits leave
    /// the state alone; otherwise the band's channel takes the quantized
    /// level and a change is reported if it differs from the current one.
    pub fn apply_sample(
        &mut self,
        sample: &TouchSample,
        config: &EngineConfig,
    ) -> Result<Option<ChannelChange>> {
        sample.check_range()?;
        if !sample.finger || sample.z < config.z_threshold {
            return Ok(None);
        }
        let band = match locate_slider(sample.x, &config.layout)? {
            SliderHit::Band(i) => i as usize,
            SliderHit::Gap => return Ok(None),
        };
        let level = quantize_level(sample.y, &config.layout)?;
        if self.levels[band] == level {
            return Ok(None);
        }
        self.levels[band] = level;
        Ok(Some(ChannelChange {
            channel: ChannelId::ALL[band],
            level,
        }))
    }

    /// Folds [`apply_sample`](Self::apply_sample) over `samples`.
    pub fn sweep<'a>(
        &mut self,
        samples: impl IntoIterator<Item = &'a TouchSample>,
        config: &EngineConfig,
    ) -> Result<Vec<ChannelChange>> {
        let mut changes = Vec::new();
        for s in samples {
            changes.extend(self.apply_sample(s, config)?);
        }
        Ok(changes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn touch(x: u16, y: u16) -> TouchSample {
        TouchSample::new(x, y, 80, true)
    }

    #[test]
    fn locate_examples() {
        let l = SliderLayout::default();
        assert_eq!(locate_slider(0, &l).unwrap(), SliderHit::Band(0));
        assert_eq!(locate_slider(6143, &l).unwrap(), SliderHit::Band(4));
        assert_eq!(locate_slider(1023, &l).unwrap(), SliderHit::Band(0));
        assert_eq!(locate_slider(1024, &l).unwrap(), SliderHit::Gap);
        assert_eq!(locate_slider(1279, &l).unwrap(), SliderHit::Gap);
        assert_eq!(locate_slider(1280, &l).unwrap(), SliderHit::Band(1));
        assert!(matches!(locate_slider(6144, &l), Err(Error::Range { .. })));
    }

    #[test]
    fn quantize_examples() {
        let l = SliderLayout::default();
        assert_eq!(quantize_level(0, &l).unwrap(), 0);
        assert_eq!(quantize_level(6143, &l).unwrap(), 22);
        assert_eq!(quantize_level(3072, &l).unwrap(), 11);
        let inv = SliderLayout {
            y_inverted: true,
            ..l
        };
        assert_eq!(quantize_level(0, &inv).unwrap(), 22);
        assert_eq!(quantize_level(6143, &inv).unwrap(), 0);
        assert!(quantize_level(6144, &l).is_err());
    }

    #[test]
    fn layout_validation() {
        assert!(SliderLayout::default().validate().is_ok());
        assert!(SliderLayout::new(1200, 36, 23, false).is_ok()); // 6000 + 144
        assert!(SliderLayout::new(1000, 256, 23, false).is_err());
        assert!(SliderLayout::new(0, 1536, 23, false).is_err());
        assert!(SliderLayout::new(1024, 256, 24, false).is_err());
        assert!(SliderLayout::new(1024, 256, 1, false).is_err());
        assert_eq!(SliderLayout::default().band_range(4), 5120..=6143);
    }

    #[test]
    fn apply_sets_level_and_is_idempotent() {
        let cfg = EngineConfig::default();
        let mut st = EngineState::new();
        let change = st.apply_sample(&touch(0, 6143), &cfg).unwrap();
        assert_eq!(
            change,
            Some(ChannelChange {
                channel: ChannelId::Red,
                level: 22
            })
        );
        assert_eq!(st.levels, [22, 0, 0, 0, 0]);
        assert_eq!(st.apply_sample(&touch(0, 6143), &cfg).unwrap(), None);
    }

    #[test]
    fn lift_light_touch_and_gap_are_ignored() {
        let cfg = EngineConfig::default();
        let mut st = EngineState {
            levels: [3, 4, 5, 6, 7],
        };
        let before = st;
        let lifted = TouchSample::new(0, 6143, 200, false);
        let light = TouchSample::new(0, 6143, 29, true);
        let gap = touch(1100, 6143);
        for s in [lifted, light, gap] {
            assert_eq!(st.apply_sample(&s, &cfg).unwrap(), None);
            assert_eq!(st, before);
        }
        // exactly at threshold counts
        let at = TouchSample::new(0, 6143, 30, true);
        assert!(st.apply_sample(&at, &cfg).unwrap().is_some());
    }

    #[test]
    fn out_of_range_sample_errors() {
        let mut st = EngineState::new();
        assert!(st
            .apply_sample(
                &TouchSample::new(7000, 0, 80, true),
                &EngineConfig::default()
            )
            .is_err());
    }

    #[test]
    fn horizontal_sweep_sets_all_channels() {
        let cfg = EngineConfig::default();
        let mut st = EngineState::new();
        let samples: Vec<_> = [0, 1280, 2560, 3840, 5120]
            .into_iter()
            .map(|x| touch(x, 6143))
            .collect();
        let changes = st.sweep(&samples, &cfg).unwrap();
        assert_eq!(st.levels, [22; 5]);
        assert_eq!(changes.len(), 5);
        assert!(st.sweep(&[], &cfg).unwrap().is_empty());
        assert_eq!(st.levels, [22; 5]);
    }

    #[test]
    fn vertical_drag_is_monotone() {
        let cfg = EngineConfig::default();
        let mut st = EngineState {
            levels: [1, 2, 0, 4, 5],
        };
        let samples: Vec<_> = (0..=6143)
            .step_by(7)
            .chain([6143])
            .map(|y| touch(2600, y))
            .collect();
        let changes = st.sweep(&samples, &cfg).unwrap();
        assert_eq!(st.levels, [1, 2, 22, 4, 5]);
        assert!(changes.iter().all(|c| c.channel == ChannelId::Blue));
        assert!(changes.windows(2).all(|w| w[0].level <= w[1].level));
    }

    #[test]
    fn reset_behaves_like_cold_start() {
        let cfg = EngineConfig::default();
        let mut st = EngineState {
            levels: [9, 9, 9, 9, 9],
        };
        st.reset();
        assert_eq!(st, EngineState::new());
        st.reset();
        assert_eq!(st, EngineState::new());
        let mut cold = EngineState::new();
        let s = touch(3900, 1000);
        assert_eq!(
            st.apply_sample(&s, &cfg).unwrap(),
            cold.apply_sample(&s, &cfg).unwrap()
        );
    }

    fn any_sample() -> impl Strategy<Value = TouchSample> {
        (0..=COORD_MAX, 0..=COORD_MAX, any::<u8>(), any::<bool>())
            .prop_map(|(x, y, z, f)| TouchSample::new(x, y, z, f))
    }

    proptest! {
        #[test]
        fn absolute_semantics(pre_a in any::<[u8; 5]>(), history in prop::collection::vec(any_sample(), 0..20), s in any_sample()) {
            // the outcome of a sample depends only on the pre-state
            let cfg = EngineConfig::default();
            let pre = EngineState { levels: pre_a.map(|l| l % 23) };
            let mut direct = pre;
            let direct_change = direct.apply_sample(&s, &cfg).unwrap();

            let mut warmed = EngineState::new();
            warmed.sweep(&history, &cfg).unwrap();
            warmed.levels = pre.levels;
            let warmed_change = warmed.apply_sample(&s, &cfg).unwrap();
            prop_assert_eq!(direct, warmed);
            prop_assert_eq!(direct_change, warmed_change);
        }

        #[test]
        fn channel_isolation_and_idempotence(pre_a in any::<[u8; 5]>(), s in any_sample()) {
            let cfg = EngineConfig::default();
            let pre = EngineState { levels: pre_a.map(|l| l % 23) };
            let mut st = pre;
            let change = st.apply_sample(&s, &cfg).unwrap();
            let differing = (0..5).filter(|&i| st.levels[i] != pre.levels[i]).count();
            prop_assert!(differing <= 1);
            prop_assert_eq!(differing == 1, change.is_some());
            let after = st;
            prop_assert_eq!(st.apply_sample(&s, &cfg).unwrap(), None);
            prop_assert_eq!(st, after);
        }
    }
}
