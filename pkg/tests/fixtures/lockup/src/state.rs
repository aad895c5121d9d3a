use cw_storage_plus::{Item, Map};
use cosmwasm_std::{Addr, Uint128};
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Lockup {
    pub id: u64,
    pub owner: Addr,
    pub amount: Uint128,
    pub release_at: u64,
}

pub const LAST_ID: Item<u64> = Item::new("lock_id");
pub const LOCKUPS: Map<u64, Lockup> = Map::new("lockups");
