//! Shootout scoring rules: five kicks per team, then sudden death.

use serde::{Deserialize, Serialize};

const REGULATION_KICKS: u32 = 5;

/// Score of a shootout from the perspective of the team about to kick.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShootoutScore {
    pub own_goals: u32,
    pub own_kicks: u32,
    pub opp_goals: u32,
    pub opp_kicks: u32,
}

/// Returns the winner (0 = first argument, 1 = second) once the shootout
/// can no longer be drawn level.
pub fn decided(a_goals: u32, a_kicks: u32, b_goals: u32, b_kicks: u32) -> Option<usize> {
    let target = REGULATION_KICKS.max(a_kicks).max(b_kicks);
    let a_max = a_goals + (target - a_kicks);
    let b_max = b_goals + (target - b_kicks);
    if a_goals > b_max {
        Some(0)
    } else if b_goals > a_max {
        Some(1)
    } else {
        None
    }
}

impl ShootoutScore {
    /// Missing this kick ends the shootout in the opponent's favour.
    pub fn miss_means_loss(&self) -> bool {
        decided(self.own_goals, self.own_kicks + 1, self.opp_goals, self.opp_kicks) == Some(1)
    }

    /// Scoring this kick wins the shootout.
    pub fn goal_means_win(&self) -> bool {
        decided(self.own_goals + 1, self.own_kicks + 1, self.opp_goals, self.opp_kicks) == Some(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score(own_goals: u32, own_kicks: u32, opp_goals: u32, opp_kicks: u32) -> ShootoutScore {
        ShootoutScore { own_goals, own_kicks, opp_goals, opp_kicks }
    }

    #[test]
    fn regulation_cases() {
        // Fifth kick of the second team, trailing 3-4: a miss loses, a goal only levels.
        let s = score(3, 4, 4, 5);
        assert!(s.miss_means_loss());
        assert!(!s.goal_means_win());
        // Fifth kick of the second team, 4-3 up: a goal wins.
        let s = score(4, 4, 3, 5);
        assert!(s.goal_means_win());
        assert!(!s.miss_means_loss());
        // Opening kick.
        let s = score(0, 0, 0, 0);
        assert!(!s.goal_means_win() && !s.miss_means_loss());
    }

    #[test]
    fn sudden_death() {
        // Kicking first in a sudden-death round decides nothing on its own.
        let s = score(5, 5, 5, 5);
        assert!(!s.goal_means_win() && !s.miss_means_loss());
        // Opponent scored first in the round.
        let s = score(5, 5, 6, 6);
        assert!(s.miss_means_loss());
        assert!(!s.goal_means_win());
        // Opponent missed first in the round.
        let s = score(5, 5, 5, 6);
        assert!(s.goal_means_win());
    }

    #[test]
    fn early_decision() {
        // 3-0 after three each: the trailing side can reach at most 2 more.
        assert_eq!(decided(3, 3, 0, 3), Some(0));
        assert_eq!(decided(2, 3, 0, 3), None);
        assert_eq!(decided(5, 5, 5, 5), None);
        assert_eq!(decided(6, 6, 5, 6), Some(0));
    }
}
