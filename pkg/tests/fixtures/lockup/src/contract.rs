use cosmwasm_std::{BankMsg, Coin, Deps, DepsMut, Env, MessageInfo, Response, Uint128};
use cw_utils::must_pay;

use crate::error::ContractError;
use crate::state::{Lockup, LAST_ID, LOCKUPS};

pub const DENOM: &str = "uawesome";
pub const LOCK_PERIOD: u64 = 10;

pub fn instantiate(deps: DepsMut, info: MessageInfo) -> Result<Response, ContractError> {
    LAST_ID.save(deps.storage, &0u64)?;
    Ok(Response::new()
        .add_attribute("action", "instantiate")
        .add_attribute("admin", info.sender))
}

/// Lock the attached funds until `LOCK_PERIOD` ticks have passed.
pub fn deposit(deps: DepsMut, info: MessageInfo) -> Result<Response, ContractError> {
    let amount = must_pay(&info, DENOM)?;
    let id = LAST_ID.may_load(deps.storage)?.unwrap_or_default() + 1;
    LAST_ID.save(deps.storage, &id)?;
    let lockup = Lockup {
        id,
        owner: info.sender.clone(),
        amount: Uint128::from(amount),
        release_at: LOCK_PERIOD,
    };
    LOCKUPS.save(deps.storage, id, &lockup)?;
    Ok(Response::new()
        .add_attribute("action", "deposit")
        .add_attribute("id", id.to_string()))
}

/// Release the lockups in `ids` that belong to the sender and are mature.
pub fn withdraw(
    deps: DepsMut,
    env: Env,
    info: MessageInfo,
    ids: Vec<u64>,
) -> Result<Response, ContractError> {
    let mut total = Uint128::zero();
    for id in ids {
        let lockup = LOCKUPS
            .may_load(deps.storage, id)?
            .ok_or(ContractError::NothingToClaim {})?;
        if lockup.owner != info.sender {
            return Err(ContractError::Unauthorized {});
        }
        if env.block.time.seconds() < lockup.release_at {
            return Err(ContractError::NothingToClaim {});
        }
        total += lockup.amount;
        LOCKUPS.remove(deps.storage, id);
    }
    if total.is_zero() {
        return Err(ContractError::NothingToClaim {});
    }
    Ok(Response::new()
        .add_attribute("action", "withdraw")
        .add_message(BankMsg::Send {
            to_address: info.sender.to_string(),
            amount: vec![Coin::new(total.u128(), DENOM)],
        }))
}

pub fn query_lockup(deps: Deps, id: u64) -> Option<Lockup> {
    LOCKUPS.may_load(deps.storage, id).unwrap_or(None)
}
