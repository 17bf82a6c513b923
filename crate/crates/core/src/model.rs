//! Robots, lights, configurations and the pluggable simulated protocol.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown simulated protocol `{0}`")]
    UnknownProtocol(String),
    #[error("unknown control color `{0}`")]
    UnknownColor(String),
    #[error("sim color {sim} out of range for k = {k}")]
    SimOutOfRange { sim: u32, k: u32 },
    #[error("a team needs at least 2 robots, got {0}")]
    TooFewRobots(usize),
    #[error("at most {max} robots are supported, got {got}")]
    TooManyRobots { got: usize, max: usize },
}

/// Hard upper bound on team size; robot sets are 32-bit masks.
pub const MAX_ROBOTS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RobotId(pub usize);

impl fmt::Display for RobotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A set of robots, stored as a bit mask over robot indices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RobotSet(pub u32);

impl RobotSet {
    pub const EMPTY: RobotSet = RobotSet(0);

    pub fn full(n: usize) -> RobotSet {
        if n >= 32 {
            RobotSet(u32::MAX)
        } else {
            RobotSet((1u32 << n) - 1)
        }
    }

    pub fn single(r: usize) -> RobotSet {
        RobotSet(1 << r)
    }

    pub fn from_ids<I: IntoIterator<Item = usize>>(ids: I) -> RobotSet {
        RobotSet(ids.into_iter().fold(0, |m, r| m | (1 << r)))
    }

    pub fn contains(self, r: usize) -> bool {
        r < 32 && self.0 & (1 << r) != 0
    }

    pub fn insert(&mut self, r: usize) {
        self.0 |= 1 << r;
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: RobotSet) -> RobotSet {
        RobotSet(self.0 | other.0)
    }

    pub fn intersects(self, other: RobotSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_subset(self, other: RobotSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&r| self.contains(r))
    }

    /// Highest robot index plus one, i.e. the smallest `n` this set fits in.
    pub fn span(self) -> usize {
        32 - self.0.leading_zeros() as usize
    }
}

impl fmt::Display for RobotSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.iter().map(|r| r.to_string()).collect();
        write!(f, "{{{}}}", ids.join(","))
    }
}

impl Serialize for RobotSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for RobotSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let ids = Vec::<usize>::deserialize(d)?;
        if let Some(bad) = ids.iter().find(|&&r| r >= MAX_ROBOTS) {
            return Err(serde::de::Error::custom(format!("robot id {bad} out of range")));
        }
        Ok(RobotSet::from_ids(ids))
    }
}

/// Control light of the simulator. Each protocol family uses a subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ControlColor {
    T,
    M,
    S,
    SPrime,
    W,
    X,
    Y,
}

impl ControlColor {
    pub const ALL: [ControlColor; 7] = [
        ControlColor::T,
        ControlColor::M,
        ControlColor::S,
        ControlColor::SPrime,
        ControlColor::W,
        ControlColor::X,
        ControlColor::Y,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<ControlColor> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ControlColor::T => "T",
            ControlColor::M => "M",
            ControlColor::S => "S",
            ControlColor::SPrime => "S'",
            ControlColor::W => "W",
            ControlColor::X => "X",
            ControlColor::Y => "Y",
        }
    }
}

impl fmt::Display for ControlColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControlColor {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "T" => Ok(ControlColor::T),
            "M" => Ok(ControlColor::M),
            "S" => Ok(ControlColor::S),
            "S'" | "S′" | "Sp" => Ok(ControlColor::SPrime),
            "W" => Ok(ControlColor::W),
            "X" => Ok(ControlColor::X),
            "Y" => Ok(ControlColor::Y),
            other => Err(ModelError::UnknownColor(other.to_string())),
        }
    }
}

impl Serialize for ControlColor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ControlColor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Set of control colors present in a snapshot, own color included.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ColorView(pub u8);

impl ColorView {
    pub const EMPTY: ColorView = ColorView(0);

    pub fn of(colors: &[ControlColor]) -> ColorView {
        ColorView(colors.iter().fold(0, |m, c| m | (1 << c.index())))
    }

    pub fn contains(self, c: ControlColor) -> bool {
        self.0 & (1 << c.index()) != 0
    }

    pub fn insert(&mut self, c: ControlColor) {
        self.0 |= 1 << c.index();
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset(self, other: ColorView) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersects(self, other: ColorView) -> bool {
        self.0 & other.0 != 0
    }

    pub fn iter(self) -> impl Iterator<Item = ControlColor> {
        ControlColor::ALL.into_iter().filter(move |&c| self.contains(c))
    }

    /// Sorted, comma-joined color names, e.g. `T,M`.
    pub fn names(self) -> String {
        self.iter().map(|c| c.name()).collect::<Vec<_>>().join(",")
    }

    /// Parses the `names()` form (braces optional).
    pub fn parse(s: &str) -> Result<ColorView, ModelError> {
        let inner = s.trim().trim_start_matches('{').trim_end_matches('}');
        let mut v = ColorView::EMPTY;
        for part in inner.split(',').filter(|p| !p.trim().is_empty()) {
            v.insert(part.parse()?);
        }
        Ok(v)
    }
}

impl fmt::Display for ColorView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.names())
    }
}

/// A light value: control color paired with the simulated protocol's color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProductLight {
    pub control: ControlColor,
    pub sim: u32,
}

impl ProductLight {
    pub fn new(control: ControlColor, sim: u32) -> Self {
        ProductLight { control, sim }
    }

    /// Every product light over the given control palette and `k` sim colors.
    pub fn all(controls: &[ControlColor], k: u32) -> Vec<ProductLight> {
        controls
            .iter()
            .flat_map(|&c| (0..k).map(move |s| ProductLight::new(c, s)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    /// Point at fraction `t` of the segment from `self` to `to`.
    pub fn lerp(self, to: Point, t: f64) -> Point {
        Point::new(self.x + (to.x - self.x) * t, self.y + (to.y - self.y) * t)
    }
}

/// What the simulated protocol sees: its own sim color plus every robot's
/// position (relative to the observer) and sim color. Control colors are
/// deliberately absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PSnapshot {
    pub own_sim: u32,
    pub observed: Vec<(Point, u32)>,
}

/// Output of the simulated protocol: relative destination and new sim color.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PDecision {
    pub destination: Point,
    pub sim: u32,
}

pub trait SimulatedProtocol: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    /// Number of sim colors `k`.
    fn sim_colors(&self) -> u32;
    fn compute(&self, snapshot: &PSnapshot) -> PDecision;
}

#[derive(Debug, Clone, Copy)]
pub struct Stay;

impl SimulatedProtocol for Stay {
    fn name(&self) -> String {
        "stay".into()
    }
    fn sim_colors(&self) -> u32 {
        1
    }
    fn compute(&self, s: &PSnapshot) -> PDecision {
        PDecision { destination: Point::ORIGIN, sim: s.own_sim }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Midpoint;

impl SimulatedProtocol for Midpoint {
    fn name(&self) -> String {
        "midpoint".into()
    }
    fn sim_colors(&self) -> u32 {
        1
    }
    fn compute(&self, s: &PSnapshot) -> PDecision {
        let n = s.observed.len().max(1) as f64;
        let sum = s.observed.iter().fold(Point::ORIGIN, |acc, (p, _)| acc.add(*p));
        PDecision { destination: Point::new(sum.x / n, sum.y / n), sim: s.own_sim }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ColorCycle {
    pub k: u32,
}

impl SimulatedProtocol for ColorCycle {
    fn name(&self) -> String {
        format!("color_cycle({})", self.k)
    }
    fn sim_colors(&self) -> u32 {
        self.k
    }
    fn compute(&self, s: &PSnapshot) -> PDecision {
        PDecision { destination: Point::ORIGIN, sim: (s.own_sim + 1) % self.k }
    }
}

/// Looks up a built-in test fixture by name: `stay`, `midpoint` or
/// `color_cycle(k)`.
pub fn builtin_p(name: &str) -> Result<Box<dyn SimulatedProtocol>, ModelError> {
    let name = name.trim();
    match name {
        "stay" => return Ok(Box::new(Stay)),
        "midpoint" => return Ok(Box::new(Midpoint)),
        _ => {}
    }
    let k = name
        .strip_prefix("color_cycle(")
        .and_then(|rest| rest.strip_suffix(')'))
        .and_then(|k| k.trim().parse::<u32>().ok())
        .filter(|&k| k >= 1)
        .ok_or_else(|| ModelError::UnknownProtocol(name.to_string()))?;
    Ok(Box::new(ColorCycle { k }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub execute_p: bool,
    pub from: ControlColor,
    pub next_control: ControlColor,
    /// Absolute destination; the robot's own position when P did not run.
    pub destination: Point,
    pub next_sim: u32,
}

/// What a robot stored at its Look.
#[derive(Debug, Clone, PartialEq)]
pub struct LookRecord {
    pub view: ColorView,
    pub p_snapshot: PSnapshot,
    /// Configuration version at the Look.
    pub version: u64,
    /// True when no robot was in the middle of a nontrivial move.
    pub settled: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum ActivityPhase {
    #[default]
    Idle,
    Looked(LookRecord),
    Computed(Decision),
    Moving(Decision),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub position: Point,
    pub light: ProductLight,
    pub phase: ActivityPhase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub robots: Vec<RobotState>,
    pub version: u64,
}

impl Configuration {
    /// Robot `i` at `(i, 0)` with sim color 0, all Idle.
    pub fn from_controls(controls: &[ControlColor]) -> Result<Configuration, ModelError> {
        let positions: Vec<Point> = (0..controls.len()).map(|i| Point::new(i as f64, 0.0)).collect();
        let sims = vec![0; controls.len()];
        Configuration::new(&positions, controls, &sims)
    }

    pub fn new(positions: &[Point], controls: &[ControlColor], sims: &[u32]) -> Result<Configuration, ModelError> {
        let n = controls.len();
        if n < 2 {
            return Err(ModelError::TooFewRobots(n));
        }
        if n > MAX_ROBOTS {
            return Err(ModelError::TooManyRobots { got: n, max: MAX_ROBOTS });
        }
        assert_eq!(positions.len(), n, "positions and controls differ in length");
        assert_eq!(sims.len(), n, "sims and controls differ in length");
        let robots = (0..n)
            .map(|i| RobotState {
                position: positions[i],
                light: ProductLight::new(controls[i], sims[i]),
                phase: ActivityPhase::Idle,
            })
            .collect();
        Ok(Configuration { robots, version: 0 })
    }

    pub fn n(&self) -> usize {
        self.robots.len()
    }

    pub fn controls(&self) -> Vec<ControlColor> {
        self.robots.iter().map(|r| r.light.control).collect()
    }

    pub fn support(&self) -> ColorView {
        color_view(self)
    }
}

/// The set of control colors present in `config`.
pub fn color_view(config: &Configuration) -> ColorView {
    let mut v = ColorView::EMPTY;
    for r in &config.robots {
        v.insert(r.light.control);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use ControlColor::*;

    fn view_of(cs: &[ControlColor]) -> ColorView {
        color_view(&Configuration::from_controls(cs).unwrap())
    }

    #[test]
    fn color_view_examples() {
        assert_eq!(view_of(&[T, T]), ColorView::of(&[T]));
        assert_eq!(view_of(&[T, S, SPrime]), ColorView::of(&[T, S, SPrime]));
        assert_eq!(view_of(&[M, M, S, S]), ColorView::of(&[M, S]));
    }

    #[test]
    fn view_names_are_sorted() {
        assert_eq!(ColorView::of(&[M, T]).names(), "T,M");
        assert_eq!(ColorView::of(&[SPrime, S, W]).to_string(), "{S,S',W}");
        assert_eq!(ColorView::parse("{T,S'}").unwrap(), ColorView::of(&[T, SPrime]));
        assert_eq!(ColorView::parse("M,T").unwrap(), ColorView::of(&[T, M]));
    }

    #[test]
    fn builtin_fixtures() {
        let snap = |own_sim, pts: &[(f64, f64)]| PSnapshot {
            own_sim,
            observed: pts.iter().map(|&(x, y)| (Point::new(x, y), 0)).collect(),
        };
        let stay = builtin_p("stay").unwrap();
        assert_eq!(stay.compute(&snap(0, &[(0.0, 0.0)])).destination, Point::new(0.0, 0.0));
        let mid = builtin_p("midpoint").unwrap();
        assert_eq!(mid.compute(&snap(0, &[(0.0, 0.0), (2.0, 0.0)])).destination, Point::new(1.0, 0.0));
        let cyc = builtin_p("color_cycle(3)").unwrap();
        assert_eq!(cyc.sim_colors(), 3);
        assert_eq!(cyc.compute(&snap(2, &[(0.0, 0.0)])).sim, 0);
        assert!(matches!(builtin_p("teleport"), Err(ModelError::UnknownProtocol(_))));
        assert!(builtin_p("color_cycle(0)").is_err());
    }

    #[test]
    fn robot_set_display_and_serde() {
        let s = RobotSet::from_ids([0, 2]);
        assert_eq!(s.to_string(), "{0,2}");
        assert_eq!(serde_json::to_string(&s).unwrap(), "[0,2]");
        let back: RobotSet = serde_json::from_str("[2,0]").unwrap();
        assert_eq!(back, s);
        assert_eq!(RobotSet::full(3), RobotSet::from_ids([0, 1, 2]));
    }

    #[test]
    fn product_light_palette() {
        assert_eq!(ProductLight::all(&[T, M, S, SPrime], 3).len(), 12);
    }
}
