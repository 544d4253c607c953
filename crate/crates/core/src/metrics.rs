//! User-behaviour and popularity metrics.
//!
//! Four per-question metrics come from the question owner and the question
//! itself: the answer rejection ratio over the owner's other answered
//! questions, the delay since the owner last accessed the site, the
//! question's vote score, and the owner's reputation. Skewed metrics (delay,
//! reputation) are log-transformed with `ln(1+x)` before modeling.

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One question in a user's asking history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub question_id: u64,
    /// The question received at least one answer.
    pub answered: bool,
    /// The owner accepted one of the answers.
    pub resolved: bool,
}

/// A question owner: reputation, last site access, and asking history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: u64,
    pub reputation: u64,
    pub last_access_date: NaiveDateTime,
    pub question_history: Vec<HistoryEntry>,
}

/// The behaviour/popularity block of one feature row, after imputation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BehaviourFeatures {
    pub arr: f64,
    /// Set when `arr` was imputed because the owner had no other answered
    /// questions.
    pub arr_imputed: bool,
    pub lad_days: u64,
    pub log_lad: f64,
    pub votes: i64,
    pub log_reputation: f64,
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error(
        "user {user_id} has last access {last_access} after the analysis date {analysis_date}"
    )]
    FutureLastAccess {
        user_id: u64,
        last_access: NaiveDateTime,
        analysis_date: NaiveDateTime,
    },
}

/// Fraction of the owner's answered questions that never got an accepted
/// answer, excluding `exclude_question` itself.
///
/// The target question is excluded so its own label cannot leak into the
/// feature. `None` means the owner has no other answered questions; the
/// caller substitutes the dataset-level mean and records the imputation.
pub fn answer_rejection_ratio(profile: &UserProfile, exclude_question: u64) -> Option<f64> {
    let mut answered = 0usize;
    let mut rejected = 0usize;
    for entry in &profile.question_history {
        if entry.question_id == exclude_question || !entry.answered {
            continue;
        }
        answered += 1;
        if !entry.resolved {
            rejected += 1;
        }
    }
    if answered == 0 {
        None
    } else {
        Some(rejected as f64 / answered as f64)
    }
}

/// Whole days between the owner's last site access and the analysis date.
pub fn last_access_delay(
    profile: &UserProfile,
    analysis_date: NaiveDateTime,
) -> Result<u64, MetricsError> {
    if profile.last_access_date > analysis_date {
        return Err(MetricsError::FutureLastAccess {
            user_id: profile.user_id,
            last_access: profile.last_access_date,
            analysis_date,
        });
    }
    let seconds = (analysis_date - profile.last_access_date).num_seconds();
    Ok((seconds / 86_400) as u64)
}

/// `ln(1 + x)`: keeps zero-valued raw metrics finite and preserves order.
pub fn log1p_transform(x: f64) -> f64 {
    debug_assert!(x >= 0.0, "log1p_transform expects non-negative input");
    x.ln_1p()
}

/// Question votes (raw, possibly negative) and owner reputation
/// (log-transformed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Popularity {
    pub votes: i64,
    pub log_reputation: f64,
}

pub fn popularity(question_score: i64, owner_reputation: u64) -> Popularity {
    Popularity {
        votes: question_score,
        log_reputation: log1p_transform(owner_reputation as f64),
    }
}
