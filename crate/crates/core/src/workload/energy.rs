use std::ops::Range;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};

use crate::offchain::{SettlementRecord, TxType, PARTICIPANT_LEN};

use super::seeds::{stream, Purpose};
use super::WorkloadConfig;

const SECONDS_PER_HOUR: u64 = 3_600;
/// Rejection draws before a truncated price falls back to the floor of 1.
const MAX_PRICE_REJECTIONS: usize = 10_000;

/// `max(1, round(batch_max / (1 + rate / rate_ref)))`: busier hours close
/// their batching windows sooner.
pub fn batch_size_for(rate: f64, config: &WorkloadConfig) -> usize {
    let size = (config.batch_max as f64 / (1.0 + rate.max(0.0) / config.rate_ref)).round();
    (size as usize).max(1)
}

/// Seeded anonymous identifiers; nothing but the seed reaches them.
pub fn participant_pool(config: &WorkloadConfig) -> Vec<[u8; PARTICIPANT_LEN]> {
    let mut rng = stream(config.seed, Purpose::Ids);
    (0..config.participants).map(|_| rng.gen()).collect()
}

fn draw_price<R: Rng>(normal: &Option<Normal<f64>>, mean: f64, rng: &mut R) -> u64 {
    let Some(normal) = normal else {
        return mean.round().max(1.0) as u64;
    };
    for _ in 0..MAX_PRICE_REJECTIONS {
        let x = normal.sample(rng);
        if x >= 1.0 {
            return x.round() as u64;
        }
    }
    1
}

/// Arrivals in time order as `(clock, record)`. Each hour is an independent
/// Poisson process at that hour's rate; prices are normal truncated below
/// at 1 by rejection and energy is uniform on `[energy_min, energy_max]`.
pub fn gen_energy_stream(config: &WorkloadConfig) -> Vec<(u64, SettlementRecord)> {
    let mut arrivals = stream(config.seed, Purpose::Arrivals);
    let mut prices = stream(config.seed, Purpose::Prices);
    let mut attrs = stream(config.seed, Purpose::Attributes);
    let pool = participant_pool(config);
    let normal = (config.price_sd > 0.0)
        .then(|| Normal::new(config.price_mean, config.price_sd).expect("validated price parameters"));

    let mut out = Vec::with_capacity(config.expected_records().ceil() as usize);
    for hour in 0..config.hours {
        let rate = config.rate_for_hour(hour);
        if rate <= 0.0 {
            continue;
        }
        let gap = Exp::new(rate / SECONDS_PER_HOUR as f64).expect("positive rate");
        let start = hour as u64 * SECONDS_PER_HOUR;
        let mut t = 0.0f64;
        loop {
            t += gap.sample(&mut arrivals);
            if t >= SECONDS_PER_HOUR as f64 {
                break;
            }
            let clock = start + t as u64;
            let record = SettlementRecord {
                timestamp: clock,
                participant_id: pool[attrs.gen_range(0..pool.len())],
                tx_type: if attrs.gen::<bool>() { TxType::Sell } else { TxType::Buy },
                energy_kwh: attrs.gen_range(config.energy_min..=config.energy_max),
                price_milli: draw_price(&normal, config.price_mean, &mut prices),
                region: config.regions[attrs.gen_range(0..config.regions.len())].clone(),
            };
            out.push((clock, record));
        }
    }
    out
}

/// Splits a time-ordered stream into batching windows: records of the same
/// hour, chunked at that hour's batch size. Returns index ranges.
pub fn batch_windows(stream: &[(u64, SettlementRecord)], config: &WorkloadConfig) -> Vec<Range<usize>> {
    let mut windows = Vec::new();
    let mut i = 0;
    while i < stream.len() {
        let hour = (stream[i].0 / SECONDS_PER_HOUR) as usize;
        let size = batch_size_for(config.rate_for_hour(hour), config);
        let mut end = i;
        while end < stream.len() && end - i < size && (stream[end].0 / SECONDS_PER_HOUR) as usize == hour {
            end += 1;
        }
        windows.push(i..end);
        i = end;
    }
    windows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_size_formula() {
        let c = WorkloadConfig::default();
        assert_eq!(batch_size_for(0.0, &c), 64);
        assert_eq!(batch_size_for(1_000.0, &c), 32);
        assert_eq!(batch_size_for(1e12, &c), 1);
        let mut last = usize::MAX;
        for r in 0..5_000 {
            let s = batch_size_for(r as f64, &c);
            assert!(s <= last);
            last = s;
        }
    }

    #[test]
    fn stream_is_deterministic_and_sorted() {
        let c = WorkloadConfig { hours: 3, ..WorkloadConfig::default() };
        let a = gen_energy_stream(&c);
        assert_eq!(a, gen_energy_stream(&c));
        assert!(a.windows(2).all(|w| w[0].0 <= w[1].0));
        for (clock, r) in &a {
            assert_eq!(*clock, r.timestamp);
            assert!(r.price_milli >= 1);
            assert!((c.energy_min..=c.energy_max).contains(&r.energy_kwh));
            r.validate().unwrap();
        }
        let other = gen_energy_stream(&WorkloadConfig { seed: c.seed + 1, ..c.clone() });
        assert_ne!(a, other);
    }

    #[test]
    fn zero_rates_give_empty_stream() {
        let c = WorkloadConfig { hourly_rate: vec![0.0; 24], ..WorkloadConfig::default() };
        assert!(gen_energy_stream(&c).is_empty());
    }

    #[test]
    fn degenerate_price_spread() {
        let c = WorkloadConfig { hours: 1, price_sd: 0.0, price_mean: 0.2, ..WorkloadConfig::default() };
        assert!(gen_energy_stream(&c).iter().all(|(_, r)| r.price_milli == 1));
    }

    #[test]
    fn windows_respect_hours_and_sizes() {
        let c = WorkloadConfig { hours: 4, ..WorkloadConfig::default() };
        let s = gen_energy_stream(&c);
        let w = batch_windows(&s, &c);
        assert_eq!(w.iter().map(|r| r.len()).sum::<usize>(), s.len());
        for r in &w {
            let hour = (s[r.start].0 / 3600) as usize;
            assert!(r.len() <= batch_size_for(c.rate_for_hour(hour), &c));
            assert!(s[r.clone()].iter().all(|(t, _)| (*t / 3600) as usize == hour));
        }
    }
}
