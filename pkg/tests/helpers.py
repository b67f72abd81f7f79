"""Shared fixtures-as-functions for the test suite."""

from __future__ import annotations

from chromatic_mh import Change, Event


def random_event(rng, config, id, t_range=None, x_range=None, jitter=None):
    lo, hi = t_range or (0.0, config.T)
    xlo, xhi = x_range or (0.0, config.x_max)
    x = rng.uniform(xlo, xhi)
    t = rng.uniform(lo, hi)
    sd = config.sigma_arrival if jitter is None else jitter
    arrivals = [t + abs(x - s) / config.v + sd * rng.standard_normal() for s in config.stations]
    return Event(x, t, arrivals, id)


def random_change(rng, config, events, next_id):
    """Insertion, removal, single or pair modification, including edge cases.

    Some modifications push arrivals past either end of the signal record and
    some move events out of support, so the scorer's clipping and ``-inf``
    handling are exercised too.
    """
    events = list(events)
    kinds = ["insert"]
    if events:
        kinds += ["remove", "modify", "arrival_edge"]
    if len(events) >= 2:
        kinds.append("pair")
    kind = kinds[int(rng.integers(len(kinds)))]
    if kind == "insert":
        return Change.insert(random_event(rng, config, next_id))
    pick = events[int(rng.integers(len(events)))]
    if kind == "remove":
        return Change.remove(pick)
    if kind == "modify":
        new = random_event(rng, config, pick.id)
        return Change.modify([pick], [new])
    if kind == "arrival_edge":
        arrivals = list(pick.arrivals)
        j = int(rng.integers(len(arrivals)))
        arrivals[j] = rng.choice([-30.0, -5.5, config.T - 3.3, config.T + 10.0, rng.uniform(0, config.T)])
        return Change.modify([pick], [Event(pick.x, pick.t, arrivals, pick.id)])
    i, j = rng.choice(len(events), size=2, replace=False)
    a, b = events[int(i)], events[int(j)]
    return Change.modify([a, b], [random_event(rng, config, a.id), random_event(rng, config, b.id)])


def apply_to_list(events, change):
    gone = {e.id for e in change.removed}
    return [e for e in events if e.id not in gone] + list(change.added)
