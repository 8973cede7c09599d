use crate::market::AuctionStatus;

/// Process exit codes of the `auction` tool, shared with the C ABI.
/// The numeric values are stable.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
#[repr(i32)]
pub enum StatusCode {
    Success = 0,
    Infeasible = 1,
    BudgetExceeded = 2,
    ValidationError = 3,
    IoError = 4,
    MonopolyProvider = 5,
    VerificationFailed = 6,
}

impl StatusCode {
    pub fn code(self) -> i32 {
        self as i32
    }
}

impl From<&AuctionStatus> for StatusCode {
    fn from(status: &AuctionStatus) -> Self {
        match status {
            AuctionStatus::Success => StatusCode::Success,
            AuctionStatus::Infeasible => StatusCode::Infeasible,
            AuctionStatus::MonopolyProvider { .. } => StatusCode::MonopolyProvider,
            AuctionStatus::BudgetExceeded { .. } => StatusCode::BudgetExceeded,
        }
    }
}
