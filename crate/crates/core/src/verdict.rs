//! Three-valued membership answers.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Answer {
    In,
    Out,
    Unknown,
}

impl Answer {
    pub fn is_decided(self) -> bool {
        self != Answer::Unknown
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub answer: Answer,
    pub horizon: u64,
    pub evidence: Vec<String>,
}

impl Verdict {
    pub fn new(answer: Answer, horizon: u64, evidence: impl Into<String>) -> Verdict {
        Verdict { answer, horizon, evidence: vec![evidence.into()] }
    }

    pub fn is_in(&self) -> bool {
        self.answer == Answer::In
    }

    pub fn is_out(&self) -> bool {
        self.answer == Answer::Out
    }
}
