use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use asyncgraph::graph::{build_csr, Adjacency, EdgeList};
use asyncgraph::partition::{for_each_owned_partition, DistArray, DistCsr, PartitionMap};
use asyncgraph::runtime::{wait_all_blocking, RuntimeConfig, RuntimeError};
use asyncgraph::Runtime;
use proptest::prelude::*;

fn runtime(l: usize) -> Runtime {
    Runtime::builder(RuntimeConfig::default().with_localities(l).with_workers(1, 0))
        .start()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn slices_reassemble_to_the_original(
        n in 0usize..80,
        edges in prop::collection::vec((0u32..80, 0u32..80), 0..300),
        l in 1usize..5,
        p in 1usize..5,
        sorted in any::<bool>(),
    ) {
        let edges = edges.into_iter().filter(|&(u, v)| (u as usize) < n && (v as usize) < n).collect();
        let g = build_csr(&EdgeList::new(n, edges).unwrap(), sorted).unwrap();
        let rt = runtime(l);
        let map = PartitionMap::new(n, l as u32, p).unwrap();
        let dist = DistCsr::distribute(&rt, &g, map.clone()).unwrap();
        prop_assert_eq!(dist.reassemble(&rt).unwrap(), g.clone());

        let mut stored = 0;
        for loc in rt.localities() {
            let local = dist.local(loc).unwrap();
            prop_assert_eq!(local.owned_range(), map.locality_range(loc.id()));
            for u in local.owned_range() {
                prop_assert_eq!(local.local_neighbors(u).unwrap(), g.neighbors(u));
            }
            stored += loc.metrics().graph_storage_bytes;
            prop_assert_eq!(loc.metrics().graph_storage_bytes, local.storage_bytes() as u64);
        }
        prop_assert!(stored as usize >= g.num_edges() * 4);
        dist.release(&rt);
        prop_assert_eq!(rt.total_metrics().graph_storage_bytes, 0);
        rt.stop().unwrap();
    }
}

#[test]
fn storage_is_released_only_after_the_last_user() {
    let g = build_csr(&EdgeList::new(4, vec![(0, 1), (2, 3)]).unwrap(), true).unwrap();
    let rt = runtime(2);
    let dist = DistCsr::distribute(&rt, &g, PartitionMap::new(4, 2, 1).unwrap()).unwrap();
    let held = dist.local(rt.locality(0).unwrap()).unwrap();
    dist.release(&rt);
    assert!(rt.locality(0).unwrap().metrics().graph_storage_bytes > 0);
    assert_eq!(rt.locality(1).unwrap().metrics().graph_storage_bytes, 0);
    drop(held);
    assert_eq!(rt.total_metrics().graph_storage_bytes, 0);
    rt.stop().unwrap();
}

#[test]
fn foreign_vertices_are_not_local() {
    let g = build_csr(&EdgeList::new(4, vec![(0, 1), (2, 3)]).unwrap(), true).unwrap();
    let rt = runtime(2);
    let dist = DistCsr::distribute(&rt, &g, PartitionMap::new(4, 2, 1).unwrap()).unwrap();
    let local = dist.local(rt.locality(0).unwrap()).unwrap();
    assert!(matches!(
        local.local_neighbors(2),
        Err(RuntimeError::NotLocal { vertex: 2, locality: 0 })
    ));
    let bad = PartitionMap::new(5, 2, 1).unwrap();
    assert!(DistCsr::distribute(&rt, &g, bad).is_err());
    let bad = PartitionMap::new(4, 3, 1).unwrap();
    assert!(DistCsr::distribute(&rt, &g, bad).is_err());
    rt.stop().unwrap();
}

#[test]
fn dist_array_access_and_gather() {
    let rt = runtime(3);
    let map = PartitionMap::new(10, 3, 2).unwrap();
    let arr = DistArray::from_fn(&rt, &map, |v| v as u64 * 10);
    assert_eq!(arr.gather(&rt).unwrap().unwrap(), (0..10).map(|v| v * 10).collect::<Vec<u64>>());

    let loc1 = rt.locality(1).unwrap();
    let part = arr.local(loc1).unwrap();
    let owned = map.locality_range(1);
    let v = owned.start;
    part.set(v, 7).unwrap();
    assert_eq!(part.get(v).unwrap(), 7);
    assert_eq!(part.compare_exchange(v, 7, 8).unwrap(), Ok(7));
    assert_eq!(part.compare_exchange(v, 7, 9).unwrap(), Err(8));
    assert!(matches!(part.get(0), Err(RuntimeError::NotLocal { vertex: 0, locality: 1 })));
    assert!(part.set(owned.end, 1).is_err());

    // Collective gather through spmd agrees with the direct read.
    let a = arr.clone();
    let roots = rt
        .spmd(move |loc| {
            let a = a.clone();
            async move { a.gather_at_root(&loc).await }
        })
        .unwrap();
    assert_eq!(roots[0].as_ref(), arr.gather(&rt).unwrap().as_ref());
    assert!(roots[1..].iter().all(Option::is_none));

    assert!(DistArray::from_slice(&rt, &map, &[1.0f64; 3]).is_err());
    let f = DistArray::from_slice(&rt, &map, &[0.5f64; 10]).unwrap();
    f.local(rt.locality(0).unwrap()).unwrap().fetch_add(0, 0.25).unwrap();
    assert_eq!(f.gather(&rt).unwrap().unwrap()[0], 0.75);
    rt.stop().unwrap();
}

#[test]
fn one_task_per_partition_on_its_owner() {
    let n = 37;
    let g = build_csr(&EdgeList::new(n, vec![]).unwrap(), true).unwrap();
    let rt = runtime(3);
    let map = PartitionMap::new(n, 3, 4).unwrap();
    let dist = DistCsr::distribute(&rt, &g, map.clone()).unwrap();
    let seen = Arc::new(AtomicUsize::new(0));
    let s = seen.clone();
    let futures = for_each_owned_partition(&rt, &dist, move |loc, local, p| {
        let s = s.clone();
        async move {
            s.fetch_add(1, Ordering::SeqCst);
            assert_eq!(local.locality_id(), loc.id());
            Ok((p, loc.id(), local.partition(p).vertices()))
        }
    });
    let out = wait_all_blocking(futures).unwrap();
    assert_eq!(seen.load(Ordering::SeqCst), 12);
    for (i, (p, owner, range)) in out.into_iter().enumerate() {
        assert_eq!(p, i);
        assert_eq!(owner, map.locality_of_partition(p));
        assert_eq!(range, map.partition_range(p));
    }
    rt.stop().unwrap();
}
