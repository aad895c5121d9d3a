use cosmwasm_std::{BankMsg, Coin, DepsMut, MessageInfo, Response, Uint128};
use cw_utils::must_pay;

use crate::error::ContractError;
use crate::state::{BALANCES, TOTAL};

pub const DENOM: &str = "uawesome";

pub fn instantiate(deps: DepsMut, info: MessageInfo) -> Result<Response, ContractError> {
    TOTAL.save(deps.storage, &Uint128::zero())?;
    Ok(Response::new().add_attribute("action", "instantiate"))
}

/// Credit the attached funds to the sender's balance.
pub fn deposit(deps: DepsMut, info: MessageInfo) -> Result<Response, ContractError> {
    let amount = must_pay(&info, DENOM)?;
    let balance = BALANCES
        .may_load(deps.storage, info.sender.clone())?
        .unwrap_or_default()
        + amount;
    BALANCES.save(deps.storage, info.sender.clone(), &balance)?;
    TOTAL.update(deps.storage, |t| Ok::<_, ContractError>(t + amount))?;
    Ok(Response::new()
        .add_attribute("action", "deposit")
        .add_attribute("amount", amount))
}

/// Send the sender's full balance back to them.
pub fn withdraw(deps: DepsMut, info: MessageInfo) -> Result<Response, ContractError> {
    let balance = BALANCES
        .may_load(deps.storage, info.sender.clone())?
        .unwrap_or_default();
    if balance.is_zero() {
        return Err(ContractError::NothingToWithdraw {});
    }
    BALANCES.save(deps.storage, info.sender.clone(), &Uint128::zero())?;
    TOTAL.update(deps.storage, |t| Ok::<_, ContractError>(t - balance))?;
    Ok(Response::new()
        .add_attribute("action", "withdraw")
        .add_message(BankMsg::Send {
            to_address: info.sender.to_string(),
            amount: vec![Coin::new(balance.u128(), DENOM)],
        }))
}
