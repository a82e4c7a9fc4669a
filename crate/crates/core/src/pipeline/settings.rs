use crate::ctxstats::CtxStatsConfig;
use crate::error::{Error, Location, Result};
use crate::featstruct::ProjectionTemplate;
use crate::learner::ThresholdSchedule;

/// Tunables read from a `key = value` file. `#` starts a comment.
///
/// ```text
/// thresholds.rank1 = 4
/// damping = 0.9
/// ctxstats.weights = 0.5, 0.25, 0.25
/// masks = turkish_masks.txt
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub schedule: ThresholdSchedule,
    pub delete_fraction: f64,
    pub ctxstats: CtxStatsConfig,
    /// Paths as written in the file.
    pub masks: Option<String>,
    pub templates: Option<String>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            schedule: ThresholdSchedule::default(),
            delete_fraction: 0.2,
            ctxstats: CtxStatsConfig::default(),
            masks: None,
            templates: None,
        }
    }
}

impl Settings {
    pub fn parse(text: &str, source: &str) -> Result<Settings> {
        let mut s = Settings::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let loc = || Location::new(source, idx + 1);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::syntax(loc(), "expected 'key = value'"))?;
            let (key, value) = (key.trim(), value.trim());
            let num = || -> Result<f64> {
                value
                    .parse::<f64>()
                    .map_err(|_| Error::syntax(loc(), format!("'{key}' needs a number, got '{value}'")))
            };
            match key {
                "thresholds.rank1" => s.schedule.thresholds[0] = num()?,
                "thresholds.rank2" => s.schedule.thresholds[1] = num()?,
                "thresholds.rank3" => s.schedule.thresholds[2] = num()?,
                "thresholds.rank4" => s.schedule.thresholds[3] = num()?,
                "damping" => s.schedule.damping = num()?,
                "stop_limit" => s.schedule.stop_limit = num()?,
                "delete.fraction" => s.delete_fraction = num()?,
                "ctxstats.fraction" => s.ctxstats.fraction = num()?,
                "ctxstats.passes" => {
                    s.ctxstats.passes = value
                        .parse()
                        .map_err(|_| Error::syntax(loc(), format!("'{key}' needs a count, got '{value}'")))?
                }
                "ctxstats.weights" => {
                    let w: Vec<f64> = value
                        .split(',')
                        .map(|v| v.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| Error::syntax(loc(), format!("bad weights '{value}'")))?;
                    s.ctxstats.weights = w
                        .try_into()
                        .map_err(|_| Error::syntax(loc(), "ctxstats.weights needs three values"))?;
                }
                "masks" => s.masks = Some(value.to_string()),
                "templates" => s.templates = Some(value.to_string()),
                _ => return Err(Error::syntax(loc(), format!("unknown key '{key}'"))),
            }
        }
        s.schedule.validate()?;
        s.ctxstats.validate()?;
        if !(0.0..=1.0).contains(&s.delete_fraction) {
            return Err(Error::Config(format!(
                "delete.fraction must lie in [0, 1], got {}",
                s.delete_fraction
            )));
        }
        Ok(s)
    }
}

/// The coarse projection used for choose learning and context statistics,
/// and the finer one used for delete learning.
///
/// A template set file holds a `%choose` section and a `%delete` section,
/// each in the projection template format. A file without section markers
/// serves as both.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TemplateSet {
    pub choose: ProjectionTemplate,
    pub delete: ProjectionTemplate,
}

impl TemplateSet {
    pub fn parse(text: &str, source: &str) -> Result<TemplateSet> {
        let mut sections = [String::new(), String::new()];
        let mut current: Option<usize> = None;
        for (idx, line) in text.lines().enumerate() {
            match line.trim() {
                "%choose" => {
                    current = Some(0);
                }
                "%delete" => {
                    current = Some(1);
                }
                l if l.starts_with('%') => {
                    return Err(Error::syntax(
                        Location::new(source, idx + 1),
                        format!("unknown section '{l}' (use %choose or %delete)"),
                    ))
                }
                _ => {}
            }
            for (i, s) in sections.iter_mut().enumerate() {
                let keep = !line.trim().starts_with('%') && current.is_none_or(|c| c == i);
                if keep {
                    s.push_str(line);
                }
                s.push('\n');
            }
        }
        Ok(TemplateSet {
            choose: ProjectionTemplate::parse(&sections[0], source)?,
            delete: ProjectionTemplate::parse(&sections[1], source)?,
        })
    }
}
