"""Queueing formulas and discrete-event simulators used by the testbed."""

from __future__ import annotations

import heapq
import itertools
from collections import deque

import numpy as np

from ..exceptions import StabilityError


def erlang_c(offered_load: float, servers: int) -> float:
    """Probability an arrival waits in an M/M/c queue (Erlang C).

    offered_load = arrival_rate / service_rate; requires offered_load <
    servers. Computed through the Erlang-B recursion, which is stable for
    large loads.
    """
    a = float(offered_load)
    c = int(servers)
    if c < 1:
        raise ValueError("servers must be a positive integer")
    if a < 0:
        raise ValueError("offered load must be nonnegative")
    if a >= c:
        raise StabilityError(f"offered load {a} >= servers {c}; queue is unstable")
    if a == 0.0:
        return 0.0
    b = 1.0
    for k in range(1, c + 1):
        b = a * b / (k + a * b)
    rho = a / c
    return b / (1.0 - rho * (1.0 - b))


def mean_length_of_stay(
    arrival_rate: float, service_rate: float, servers: int
) -> float:
    """Steady-state mean sojourn (wait plus service) in an M/M/c queue."""
    lam = float(arrival_rate)
    mu = float(service_rate)
    c = int(servers)
    if mu <= 0:
        raise ValueError("service rate must be positive")
    if lam < 0:
        raise ValueError("arrival rate must be nonnegative")
    if lam >= c * mu:
        raise StabilityError(
            f"arrival rate {lam} >= total service capacity {c * mu}"
        )
    if lam == 0.0:
        return 1.0 / mu
    wait = erlang_c(lam / mu, c) / (c * mu - lam)
    return wait + 1.0 / mu


# the closed-form queue is the "stylized" model of a service station that
# optimization code leans on when a cheap approximation of the objective helps
stylized_queue_mean_los = mean_length_of_stay


def simulate_mmc_sojourn(
    arrival_rate: float,
    service_rate: float,
    servers: int,
    n_arrivals: int,
    rng: np.random.Generator,
    warmup: int = 0,
) -> float:
    """Mean sojourn over one FCFS M/M/c sample path.

    Customers are assigned to the earliest-free server, which reproduces
    FCFS order exactly, so no event calendar is needed. The first `warmup`
    customers are discarded from the average.
    """
    lam = float(arrival_rate)
    mu = float(service_rate)
    c = int(servers)
    n = int(n_arrivals)
    if n <= warmup:
        raise ValueError("need n_arrivals > warmup")
    arrivals = np.cumsum(rng.exponential(1.0 / lam, n))
    services = rng.exponential(1.0 / mu, n)
    free = [0.0] * c
    heapq.heapify(free)
    total = 0.0
    kept = 0
    for i in range(n):
        t_free = heapq.heappop(free)
        start = arrivals[i] if arrivals[i] > t_free else t_free
        done = start + services[i]
        heapq.heappush(free, done)
        if i >= warmup:
            total += done - arrivals[i]
            kept += 1
    return total / kept


class _TandemState:
    """Mutable per-run state of the tandem network simulator."""

    def __init__(self, stations: int, servers, capacity):
        self.free = [int(c) for c in servers]
        self.waiting = [deque() for _ in range(stations)]
        self.blocked = [deque() for _ in range(stations)]
        self.count = [0] * stations
        self.capacity = list(capacity)

    def has_space(self, j: int) -> bool:
        cap = self.capacity[j]
        return cap is None or self.count[j] < cap


def simulate_tandem_sojourn(
    arrival_rate: float,
    service_rates,
    servers,
    capacity=None,
    n_arrivals: int = 10_000,
    rng: np.random.Generator | None = None,
    warmup: int = 0,
) -> float:
    """Mean sojourn through a tandem of FCFS exponential-service stations.

    Customers arrive Poisson(arrival_rate) at station 0 (unbounded waiting
    room there), pass through stations in order, and leave after the last.
    capacity[j] bounds the number physically present at station j >= 1;
    a customer finishing service at j with station j+1 full stays put,
    holding its server, until space frees (production blocking). capacity
    entries of None mean unbounded.

    Returns the mean sojourn of completions after skipping the first
    `warmup` of them.
    """
    mu = [float(m) for m in np.atleast_1d(service_rates)]
    J = len(mu)
    srv = [int(s) for s in np.atleast_1d(servers)]
    if len(srv) == 1:
        srv = srv * J
    if len(srv) != J:
        raise ValueError("servers must match the number of stations")
    if capacity is None:
        cap = [None] * J
    else:
        cap = list(capacity)
        if len(cap) != J:
            raise ValueError("capacity must match the number of stations")
    if any(m <= 0 for m in mu):
        raise ValueError("service rates must be positive")
    if rng is None:
        rng = np.random.default_rng()
    n = int(n_arrivals)
    if n <= warmup:
        raise ValueError("need n_arrivals > warmup")

    st = _TandemState(J, srv, cap)
    events: list = []
    tick = itertools.count()
    arrival_time = {}
    sojourns = []

    def schedule(t, kind, station, cust):
        heapq.heappush(events, (t, next(tick), kind, station, cust))

    def try_start(j, cust, t):
        if st.free[j] > 0:
            st.free[j] -= 1
            schedule(t + rng.exponential(1.0 / mu[j]), "done", j, cust)
        else:
            st.waiting[j].append(cust)

    def release_server(j, t):
        if st.waiting[j]:
            nxt = st.waiting[j].popleft()
            schedule(t + rng.exponential(1.0 / mu[j]), "done", j, nxt)
        else:
            st.free[j] += 1

    def unblock_into(j, t):
        # a space opened at station j; pull one blocked customer from j-1
        if j == 0 or not st.blocked[j - 1] or not st.has_space(j):
            return
        cust = st.blocked[j - 1].popleft()
        st.count[j] += 1
        try_start(j, cust, t)
        st.count[j - 1] -= 1
        release_server(j - 1, t)
        unblock_into(j - 1, t)

    next_arrival = rng.exponential(1.0 / arrival_rate)
    schedule(next_arrival, "arrival", 0, 0)
    arrived = 1

    while events:
        t, _, kind, j, cust = heapq.heappop(events)
        if kind == "arrival":
            arrival_time[cust] = t
            st.count[0] += 1
            try_start(0, cust, t)
            if arrived < n:
                schedule(t + rng.exponential(1.0 / arrival_rate), "arrival", 0, arrived)
                arrived += 1
        else:  # service completion at station j
            if j == J - 1:
                sojourns.append(t - arrival_time.pop(cust))
                st.count[j] -= 1
                release_server(j, t)
                unblock_into(j, t)
            elif st.has_space(j + 1):
                st.count[j + 1] += 1
                try_start(j + 1, cust, t)
                st.count[j] -= 1
                release_server(j, t)
                unblock_into(j, t)
            else:
                st.blocked[j].append(cust)

    kept = sojourns[warmup:]
    return float(np.mean(kept))
