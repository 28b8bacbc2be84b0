//! EnergyTrading: minimal order tuples and settlement linkage. Settlement
//! details stay off-chain; a settle event only links the two orders to an
//! anchor in the verifier.

use crate::codec::{word_padded, Word, WordReader, WordWriter};
use crate::ledger::{slot, AccountId, Call, CallContext, CallResult, Contract, Ledger, Revert, Role};

use super::verifier::meta_slot;
use super::{account_from_bytes, account_word, be_u64, require_role, TRADING, VERIFIER};

pub const MAX_REGION_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    fn tag(self) -> u8 {
        match self {
            Side::Buy => 0,
            Side::Sell => 1,
        }
    }

    fn from_tag(tag: u64) -> Option<Self> {
        match tag {
            0 => Some(Side::Buy),
            1 => Some(Side::Sell),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderStatus {
    Open,
    Settled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Order {
    pub order_id: Word,
    pub side: Side,
    pub quantity: u64,
    pub price: u64,
    pub region: String,
    pub owner: AccountId,
    pub status: OrderStatus,
}

pub struct EnergyTrading;

fn main_slot(id: &Word) -> Word {
    slot(b"order.main", &[id])
}

fn extra_slot(id: &Word) -> Word {
    slot(b"order.extra", &[id])
}

pub fn place_order_call(order_id: &Word, side: Side, quantity: u64, price: u64, region: &str) -> Call {
    let args = WordWriter::new()
        .word(order_id)
        .u64(side.tag() as u64)
        .u64(quantity)
        .u64(price)
        .short(region.as_bytes())
        .finish();
    Call::new(TRADING, "place_order", args)
}

pub fn settle_call(buy: &Word, sell: &Word, commitment_id: &Word) -> Call {
    Call::new(TRADING, "settle", WordWriter::new().word(buy).word(sell).word(commitment_id).finish())
}

// main word: side(1) | status(1) | quantity(8) | price(8) | pad(14)
fn pack_main(side: Side, status: OrderStatus, quantity: u64, price: u64) -> Word {
    let mut w = [0u8; 32];
    w[0] = side.tag();
    w[1] = (status == OrderStatus::Settled) as u8;
    w[2..10].copy_from_slice(&quantity.to_be_bytes());
    w[10..18].copy_from_slice(&price.to_be_bytes());
    w
}

// extra word: region(16) | owner(16)
fn pack_extra(region: &[u8], owner: &AccountId) -> Word {
    let mut w = [0u8; 32];
    w[..region.len()].copy_from_slice(region);
    w[16..].copy_from_slice(&account_word(owner)[..16]);
    w
}

fn unpack(id: &Word, main: Word, extra: Word) -> Option<Order> {
    let region_end = extra[..16].iter().position(|b| *b == 0).unwrap_or(16);
    Some(Order {
        order_id: *id,
        side: Side::from_tag(main[0] as u64)?,
        status: if main[1] == 1 { OrderStatus::Settled } else { OrderStatus::Open },
        quantity: be_u64(&main[2..10]),
        price: be_u64(&main[10..18]),
        region: String::from_utf8(extra[..region_end].to_vec()).ok()?,
        owner: account_from_bytes(&extra[16..])?,
    })
}

pub fn order(ledger: &Ledger, id: &Word) -> Option<Order> {
    let main = ledger.read_slot(TRADING, &main_slot(id))?;
    let extra = ledger.read_slot(TRADING, &extra_slot(id))?;
    unpack(id, main, extra)
}

fn load_order(ctx: &mut CallContext<'_>, id: &Word) -> Result<Order, Revert> {
    let main = ctx.sload(&main_slot(id)).ok_or_else(|| Revert::new("unknown order"))?;
    let extra = ctx.sload(&extra_slot(id)).ok_or_else(|| Revert::new("unknown order"))?;
    unpack(id, main, extra).ok_or_else(|| Revert::new("corrupt order"))
}

impl Contract for EnergyTrading {
    fn name(&self) -> &'static str {
        TRADING
    }

    fn execute(&self, ctx: &mut CallContext<'_>, op: &str, args: &[u8]) -> CallResult {
        match op {
            "place_order" => {
                let mut r = WordReader::new(args);
                let id = r.word()?;
                let side = Side::from_tag(r.u64()?).ok_or_else(|| Revert::new("invalid order"))?;
                let quantity = r.u64()?;
                let price = r.u64()?;
                let region = r.short(MAX_REGION_LEN)?;
                r.finish()?;
                require_role(ctx, Role::Prosumer)?;
                if quantity == 0 || price == 0 || region.is_empty() {
                    return Err(Revert::new("invalid order"));
                }
                if ctx.sload(&main_slot(&id)).is_some() {
                    return Err(Revert::new("order exists"));
                }
                let owner = ctx.caller().clone();
                ctx.sstore(main_slot(&id), pack_main(side, OrderStatus::Open, quantity, price));
                ctx.sstore(extra_slot(&id), pack_extra(&region, &owner));
                ctx.emit(
                    "OrderPlaced",
                    WordWriter::new().word(&id).u64(side.tag() as u64).u64(quantity).u64(price).short(&region).finish(),
                );
                Ok(Vec::new())
            }
            "settle" => {
                let mut r = WordReader::new(args);
                let buy_id = r.word()?;
                let sell_id = r.word()?;
                let anchor = r.word()?;
                r.finish()?;
                require_role(ctx, Role::Prosumer)?;
                let buy = load_order(ctx, &buy_id)?;
                let sell = load_order(ctx, &sell_id)?;
                if buy.status != OrderStatus::Open || sell.status != OrderStatus::Open {
                    return Err(Revert::new("order not open"));
                }
                let matched = buy.side == Side::Buy
                    && sell.side == Side::Sell
                    && buy.region == sell.region
                    && buy.quantity == sell.quantity;
                if !matched {
                    return Err(Revert::new("no match"));
                }
                if ctx.sload_from(VERIFIER, &meta_slot(&anchor)).is_none() {
                    return Err(Revert::new("no anchor"));
                }
                for o in [&buy, &sell] {
                    ctx.sstore(main_slot(&o.order_id), pack_main(o.side, OrderStatus::Settled, o.quantity, o.price));
                }
                ctx.emit("Settled", WordWriter::new().word(&buy_id).word(&sell_id).word(&anchor).finish());
                Ok(Vec::new())
            }
            _ => Err(Revert::unknown_target()),
        }
    }
}

/// Region label padded into a word; `None` if longer than 16 bytes.
pub fn region_word(region: &str) -> Option<Word> {
    (region.len() <= MAX_REGION_LEN).then(|| word_padded(region.as_bytes())).flatten()
}
