use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

/// Upper bound for distance parameters, meters.
pub const MAX_DISTANCE: f64 = 10_000.0;
/// Upper bound for speed parameters, m/s.
pub const MAX_SPEED: f64 = 200.0;

/// Positive per-frame predicate over an (ego, object) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Atom {
    DistanceBelow(f64),
    DistanceAtLeast(f64),
    /// Object bearing within ± half-angle of the ego heading.
    ObjectAhead(f64),
    /// Object bearing within ± half-angle of the reversed ego heading.
    ObjectBehind(f64),
    HeadingAligned(f64),
    HeadingOpposed(f64),
    /// Absolute relative heading in [min, max], either side.
    HeadingCrossing(f64, f64),
    EgoSpeedAtLeast(f64),
    ObjectSpeedAtLeast(f64),
}

impl Atom {
    pub fn name(&self) -> &'static str {
        match self {
            Atom::DistanceBelow(_) => "distance_below",
            Atom::DistanceAtLeast(_) => "distance_at_least",
            Atom::ObjectAhead(_) => "object_ahead",
            Atom::ObjectBehind(_) => "object_behind",
            Atom::HeadingAligned(_) => "heading_aligned",
            Atom::HeadingOpposed(_) => "heading_opposed",
            Atom::HeadingCrossing(..) => "heading_crossing",
            Atom::EgoSpeedAtLeast(_) => "ego_speed_at_least",
            Atom::ObjectSpeedAtLeast(_) => "object_speed_at_least",
        }
    }

    fn check_bounds(&self) -> Result<(), String> {
        let in_range = |v: f64, lo: f64, hi: f64, what: &str| {
            if v.is_finite() && (lo..=hi).contains(&v) {
                Ok(())
            } else {
                Err(format!("{}: {what} {v} outside [{lo}, {hi}]", self.name()))
            }
        };
        match *self {
            Atom::DistanceBelow(r) | Atom::DistanceAtLeast(r) => in_range(r, 0.0, MAX_DISTANCE, "distance"),
            Atom::ObjectAhead(a) | Atom::ObjectBehind(a) | Atom::HeadingAligned(a) | Atom::HeadingOpposed(a) => {
                in_range(a, 0.0, PI, "angle")
            }
            Atom::HeadingCrossing(lo, hi) => {
                in_range(lo, 0.0, PI, "angle")?;
                in_range(hi, lo, PI, "angle")
            }
            Atom::EgoSpeedAtLeast(v) | Atom::ObjectSpeedAtLeast(v) => in_range(v, 0.0, MAX_SPEED, "speed"),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Atom::HeadingCrossing(lo, hi) => write!(f, "{}({lo}, {hi})", self.name()),
            Atom::DistanceBelow(v)
            | Atom::DistanceAtLeast(v)
            | Atom::ObjectAhead(v)
            | Atom::ObjectBehind(v)
            | Atom::HeadingAligned(v)
            | Atom::HeadingOpposed(v)
            | Atom::EgoSpeedAtLeast(v)
            | Atom::ObjectSpeedAtLeast(v) => write!(f, "{}({v})", self.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    /// Conjunction of atoms, evaluated against each object of a listed class.
    Interaction { object_classes: Vec<String>, predicates: Vec<Atom> },
    /// No object of any whitelisted class closer than `radius` meters.
    EgoAlone { radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseScenarioRule {
    pub type_name: String,
    pub condition: Condition,
}

impl BaseScenarioRule {
    pub fn is_ego_alone(&self) -> bool {
        matches!(self.condition, Condition::EgoAlone { .. })
    }
}

/// Validated rules: unique type names, no negation, exactly one ego-alone rule.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    rules: Vec<BaseScenarioRule>,
}

#[derive(Debug, Error, PartialEq)]
pub enum RuleError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("duplicate rule type `{0}`")]
    DuplicateType(String),
    #[error("line {line}: negation is not allowed, rules must be formulated positively (`{text}`)")]
    Negation { line: usize, text: String },
    #[error("rule set has no ego-alone rule (`when: no_whitelisted_object_within(<r>)`)")]
    MissingEgoAlone,
    #[error("rule set has more than one ego-alone rule: `{0}` and `{1}`")]
    MultipleEgoAlone(String, String),
    #[error("rule `{rule}`: {message}")]
    Invalid { rule: String, message: String },
}

/// Shipped default rules.
pub const DEFAULT_RULES: &str = include_str!("../../data/default_rules.txt");

fn is_negated(token: &str) -> bool {
    let t = token.trim();
    t.starts_with('!') || t.starts_with('~') || t == "not" || t.starts_with("not ") || t.starts_with("not(") || t == "except"
}

fn parse_number(raw: &str) -> Option<f64> {
    let raw = raw.trim();
    let v = match raw.strip_suffix("deg") {
        Some(d) => d.trim().parse::<f64>().ok()?.to_radians(),
        None => raw.parse::<f64>().ok()?,
    };
    v.is_finite().then_some(v)
}

enum Term {
    Atom(Atom),
    Alone(f64),
}

fn parse_term(line: usize, text: &str) -> Result<Term, RuleError> {
    let syntax = |message: String| RuleError::Syntax { line, message };
    if is_negated(text) {
        return Err(RuleError::Negation {
            line,
            text: text.trim().to_string(),
        });
    }
    let text = text.trim();
    let (name, rest) = text
        .split_once('(')
        .ok_or_else(|| syntax(format!("expected `<atom>(<args>)`, got `{text}`")))?;
    let args = rest
        .strip_suffix(')')
        .ok_or_else(|| syntax(format!("missing `)` in `{text}`")))?;
    let nums: Vec<f64> = args
        .split(',')
        .map(|a| parse_number(a).ok_or_else(|| syntax(format!("bad number `{}` in `{text}`", a.trim()))))
        .collect::<Result<_, _>>()?;
    let one = || -> Result<f64, RuleError> {
        match nums.as_slice() {
            [v] => Ok(*v),
            _ => Err(syntax(format!("`{}` takes one argument", name.trim()))),
        }
    };
    let atom = match name.trim() {
        "distance_below" => Atom::DistanceBelow(one()?),
        "distance_at_least" => Atom::DistanceAtLeast(one()?),
        "object_ahead" => Atom::ObjectAhead(one()?),
        "object_behind" => Atom::ObjectBehind(one()?),
        "heading_aligned" => Atom::HeadingAligned(one()?),
        "heading_opposed" => Atom::HeadingOpposed(one()?),
        "heading_crossing" => match nums.as_slice() {
            [lo, hi] => Atom::HeadingCrossing(*lo, *hi),
            _ => return Err(syntax("`heading_crossing` takes two arguments".into())),
        },
        "ego_speed_at_least" => Atom::EgoSpeedAtLeast(one()?),
        "object_speed_at_least" => Atom::ObjectSpeedAtLeast(one()?),
        "no_whitelisted_object_within" => {
            let r = one()?;
            if !(r > 0.0 && r <= MAX_DISTANCE) {
                return Err(syntax(format!("radius {r} outside (0, {MAX_DISTANCE}]")));
            }
            return Ok(Term::Alone(r));
        }
        other => return Err(syntax(format!("unknown atom `{other}`"))),
    };
    atom.check_bounds().map_err(syntax)?;
    Ok(Term::Atom(atom))
}

struct Draft {
    name: String,
    classes: Option<Vec<String>>,
    when: Option<Vec<Term>>,
}

fn finish(d: Draft) -> Result<BaseScenarioRule, RuleError> {
    let invalid = |message: &str| RuleError::Invalid {
        rule: d.name.clone(),
        message: message.to_string(),
    };
    let terms = d.when.ok_or_else(|| invalid("missing `when:` line"))?;
    let classes = d.classes.unwrap_or_default();
    let alone: Vec<f64> = terms
        .iter()
        .filter_map(|t| match t {
            Term::Alone(r) => Some(*r),
            Term::Atom(_) => None,
        })
        .collect();
    let condition = if alone.is_empty() {
        if classes.is_empty() {
            return Err(invalid("interaction rule needs at least one object class"));
        }
        let predicates: Vec<Atom> = terms
            .into_iter()
            .filter_map(|t| match t {
                Term::Atom(a) => Some(a),
                Term::Alone(_) => None,
            })
            .collect();
        Condition::Interaction {
            object_classes: classes,
            predicates,
        }
    } else {
        if terms.len() != 1 || !classes.is_empty() {
            return Err(invalid(
                "no_whitelisted_object_within must be the only predicate of a rule without classes",
            ));
        }
        Condition::EgoAlone { radius: alone[0] }
    };
    Ok(BaseScenarioRule {
        type_name: d.name,
        condition,
    })
}

/// Compiles a rule document:
///
/// ```text
/// rule following
///   classes: car truck_bus
///   when: object_ahead(30deg) & heading_aligned(30deg) & distance_below(50)
/// ```
///
/// Angles are radians unless suffixed with `deg`.
pub fn compile_rules(document: &str) -> Result<RuleSet, RuleError> {
    let mut rules: Vec<BaseScenarioRule> = Vec::new();
    let mut draft: Option<Draft> = None;
    for (i, raw) in document.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let syntax = |message: String| RuleError::Syntax { line, message };
        if !raw.starts_with(char::is_whitespace) {
            let toks: Vec<&str> = text.split_whitespace().collect();
            if toks.len() != 2 || toks[0] != "rule" {
                return Err(syntax(format!("expected `rule <type_name>`, got `{text}`")));
            }
            if let Some(d) = draft.take() {
                rules.push(finish(d)?);
            }
            draft = Some(Draft {
                name: toks[1].to_string(),
                classes: None,
                when: None,
            });
            continue;
        }
        let Some(d) = draft.as_mut() else {
            return Err(syntax("indented line outside a rule block".into()));
        };
        let (key, value) = text
            .split_once(':')
            .ok_or_else(|| syntax(format!("expected `<key>: <value>`, got `{text}`")))?;
        match key.trim() {
            "classes" => {
                if d.classes.is_some() {
                    return Err(syntax("duplicate `classes:` line".into()));
                }
                let classes: Vec<String> = value.split_whitespace().map(String::from).collect();
                if let Some(neg) = classes.iter().find(|c| is_negated(c)) {
                    return Err(RuleError::Negation {
                        line,
                        text: neg.clone(),
                    });
                }
                d.classes = Some(classes);
            }
            "when" => {
                if d.when.is_some() {
                    return Err(syntax("duplicate `when:` line".into()));
                }
                if value.contains('|') {
                    return Err(syntax("only conjunctions (`&`) are supported".into()));
                }
                let terms = value
                    .split('&')
                    .map(|t| parse_term(line, t))
                    .collect::<Result<Vec<_>, _>>()?;
                d.when = Some(terms);
            }
            other => return Err(syntax(format!("unknown key `{other}`"))),
        }
    }
    if let Some(d) = draft.take() {
        rules.push(finish(d)?);
    }
    RuleSet::new(rules)
}

impl RuleSet {
    pub fn new(rules: Vec<BaseScenarioRule>) -> Result<Self, RuleError> {
        for (i, r) in rules.iter().enumerate() {
            if r.type_name.is_empty() || r.type_name.chars().any(|c| c.is_whitespace() || c == ',') {
                return Err(RuleError::Invalid {
                    rule: r.type_name.clone(),
                    message: "type name must be a token without whitespace or commas".into(),
                });
            }
            if rules[..i].iter().any(|o| o.type_name == r.type_name) {
                return Err(RuleError::DuplicateType(r.type_name.clone()));
            }
            if let Condition::Interaction { predicates, .. } = &r.condition {
                if predicates.is_empty() {
                    return Err(RuleError::Invalid {
                        rule: r.type_name.clone(),
                        message: "needs at least one predicate".into(),
                    });
                }
                for a in predicates {
                    a.check_bounds().map_err(|message| RuleError::Invalid {
                        rule: r.type_name.clone(),
                        message,
                    })?;
                }
            }
        }
        let alone: Vec<&BaseScenarioRule> = rules.iter().filter(|r| r.is_ego_alone()).collect();
        match alone.as_slice() {
            [] => return Err(RuleError::MissingEgoAlone),
            [_] => {}
            [a, b, ..] => return Err(RuleError::MultipleEgoAlone(a.type_name.clone(), b.type_name.clone())),
        }
        Ok(RuleSet { rules })
    }

    pub fn default_rules() -> RuleSet {
        compile_rules(DEFAULT_RULES).expect("shipped default rules compile")
    }

    pub fn rules(&self) -> &[BaseScenarioRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn get(&self, type_name: &str) -> Option<&BaseScenarioRule> {
        self.rules.iter().find(|r| r.type_name == type_name)
    }

    pub fn ego_alone(&self) -> (&str, f64) {
        self.rules
            .iter()
            .find_map(|r| match r.condition {
                Condition::EgoAlone { radius } => Some((r.type_name.as_str(), radius)),
                _ => None,
            })
            .expect("rule set invariant: one ego-alone rule")
    }

    /// Copy without the named interaction rule. The ego-alone rule cannot be
    /// removed.
    pub fn without(&self, type_name: &str) -> Result<RuleSet, RuleError> {
        RuleSet::new(self.rules.iter().filter(|r| r.type_name != type_name).cloned().collect())
    }

    /// Canonical rule document; compiles back to an equal rule set.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            out.push_str(&format!("rule {}\n", r.type_name));
            match &r.condition {
                Condition::Interaction {
                    object_classes,
                    predicates,
                } => {
                    out.push_str(&format!("  classes: {}\n", object_classes.join(" ")));
                    let when: Vec<String> = predicates.iter().map(Atom::to_string).collect();
                    out.push_str(&format!("  when: {}\n", when.join(" & ")));
                }
                Condition::EgoAlone { radius } => {
                    out.push_str(&format!("  when: no_whitelisted_object_within({radius})\n"));
                }
            }
        }
        out
    }

    /// Checks that go beyond syntax: every whitelisted class is handled by
    /// some interaction rule, rules only name whitelisted classes, and every
    /// interaction rule requires `distance_below(r)` with `r` no larger than
    /// the ego-alone radius, which keeps ego-alone exclusive. Empty means the
    /// rule set is total over the whitelist.
    pub fn lint(&self, class_whitelist: &[String]) -> Vec<LintFinding> {
        let (alone_name, radius) = self.ego_alone();
        let mut out = Vec::new();
        for r in &self.rules {
            let Condition::Interaction {
                object_classes,
                predicates,
            } = &r.condition
            else {
                continue;
            };
            let bounded = predicates
                .iter()
                .any(|a| matches!(a, Atom::DistanceBelow(d) if *d <= radius));
            if !bounded {
                out.push(LintFinding {
                    rule: r.type_name.clone(),
                    message: format!("lacks distance_below(r) with r <= {radius}; may overlap `{alone_name}`"),
                });
            }
            for c in object_classes {
                if !class_whitelist.contains(c) {
                    out.push(LintFinding {
                        rule: r.type_name.clone(),
                        message: format!("class `{c}` is not whitelisted"),
                    });
                }
            }
        }
        for c in class_whitelist {
            let handled = self.rules.iter().any(|r| {
                matches!(&r.condition, Condition::Interaction { object_classes, .. } if object_classes.contains(c))
            });
            if !handled {
                out.push(LintFinding {
                    rule: alone_name.to_string(),
                    message: format!("no rule handles class `{c}`; such objects within {radius} m leave gaps"),
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LintFinding {
    pub rule: String,
    pub message: String,
}

impl fmt::Display for LintFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.message)
    }
}
