use cosmwasm_std::StdError;

#[derive(Debug, PartialEq)]
pub enum ContractError {
    Std(StdError),
    NothingToWithdraw {},
}
