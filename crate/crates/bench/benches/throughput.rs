use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use gqads_bench::protocol_fixtures;
use gqads_core::adversary::{run_campaign, AttackSpec};
use gqads_core::analysis::{gamma_star, n_opt, p_rep_exact, BetaRule};
use gqads_core::mac::mac;
use gqads_core::protocol::{distribute, sign, verify};
use gqads_core::{BitString, MacConfig, ProtocolParams, Seed};

fn bench_mac(c: &mut Criterion) {
    let mut g = c.benchmark_group("mac");
    let cfg = MacConfig::default();
    let key = BitString::random(&mut Seed::from_u64(1).rng(), 256);
    for len in [64usize, 1024, 16 * 1024] {
        let msg = vec![0xa5u8; len];
        g.throughput(Throughput::Bytes(len as u64));
        g.bench_with_input(BenchmarkId::new("poly1305_hmac", len), &msg, |b, m| {
            b.iter(|| mac(black_box(m), &key, &cfg).unwrap())
        });
    }
    g.finish();
}

fn bench_protocol(c: &mut Criterion) {
    let mut g = c.benchmark_group("protocol");
    for (name, params) in protocol_fixtures() {
        let (alice, bob, _) = distribute(&Seed::from_u64(2), &params).unwrap();
        let sm = sign(&alice, b"benchmark message").unwrap();
        g.bench_function(BenchmarkId::new("sign", name), |b| b.iter(|| sign(&alice, black_box(b"benchmark message")).unwrap()));
        g.bench_function(BenchmarkId::new("verify", name), |b| b.iter(|| verify(&bob, black_box(&sm)).unwrap()));
    }
    g.finish();
}

fn bench_analysis(c: &mut Criterion) {
    let mut g = c.benchmark_group("analysis");
    g.bench_function("p_rep_exact_n128", |b| b.iter(|| p_rep_exact(black_box(128), 64, 129).unwrap()));
    g.bench_function("gamma_star_n64_r64_half", |b| b.iter(|| gamma_star(black_box(64), 64, BetaRule::Half).unwrap()));
    g.bench_function("n_opt_4096", |b| b.iter(|| n_opt(black_box(4096)).unwrap()));
    g.finish();
}

fn bench_campaign(c: &mut Criterion) {
    let mut g = c.benchmark_group("campaign");
    g.sample_size(10);
    let rep = AttackSpec::repudiation(ProtocolParams::gqads(4, 256, 2, 5).validate().unwrap(), None);
    let forge = AttackSpec::forgery(&ProtocolParams::gqads(8, 8, 4, 9).validate().unwrap(), 8).unwrap();
    for spec in [rep, forge] {
        g.throughput(Throughput::Elements(1000));
        g.bench_function(spec.name(), |b| b.iter(|| run_campaign(&spec, 1000, &Seed::from_u64(3)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, bench_mac, bench_protocol, bench_analysis, bench_campaign);
criterion_main!(benches);
