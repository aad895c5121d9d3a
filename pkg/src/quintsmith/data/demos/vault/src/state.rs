use cosmwasm_std::{Addr, Uint128};
use cw_storage_plus::{Item, Map};
use serde::{Deserialize, Serialize};

pub const BALANCES: Map<Addr, Uint128> = Map::new("balances");
pub const TOTAL: Item<Uint128> = Item::new("total");
