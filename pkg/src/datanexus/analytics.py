"""Usage-log analytics: sessionization, positive signals, report metrics.

The action vocabulary lives in ``resources/action_vocabulary.json`` so the
web client can assert against the same list. Six action names are plain
navigation; twenty more are "positive signals", grouped by what the user
obtained (downloads, exports, link exploration, portal jumps).
"""

import json
import statistics
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from importlib import resources
from typing import Any, Iterable

from .model import ALL_CATEGORIES, CATEGORY_VALUES

_VOCAB = json.loads(
    resources.files("datanexus.resources").joinpath("action_vocabulary.json").read_text("utf-8")
)

CORE_ACTIONS: tuple[str, ...] = tuple(_VOCAB["core"])
SIGNAL_GROUP_ACTIONS: dict[str, tuple[str, ...]] = {
    group: tuple(actions) for group, actions in _VOCAB["signals"].items()
}
_ACTION_TO_GROUP: dict[str, str] = {
    action: group for group, actions in SIGNAL_GROUP_ACTIONS.items() for action in actions
}
ACTION_VOCABULARY: frozenset[str] = frozenset(CORE_ACTIONS) | frozenset(_ACTION_TO_GROUP)

DEFAULT_SESSION_TIMEOUT = timedelta(minutes=30)

PATH_CLASSES = ("search", "view_record", "positive", "other")


class UnknownActionError(ValueError):
    pass


def classify_signal(action: str) -> str | None:
    """Signal group of an action, or None for plain navigation actions."""
    if action not in ACTION_VOCABULARY:
        raise UnknownActionError(f"unknown action: {action}")
    return _ACTION_TO_GROUP.get(action)


def parse_timestamp(value: str) -> datetime:
    stamp = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    return stamp


_VALID_CATEGORIES = set(CATEGORY_VALUES) | {ALL_CATEGORIES}


@dataclass
class UsageEvent:
    timestamp: datetime
    client_id: str
    action: str
    category: str | None = None
    record_id: str | None = None
    query: str | None = None
    has_links: bool | None = None
    target_category: str | None = None

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "UsageEvent":
        client_id = doc.get("client_id")
        if not client_id or not isinstance(client_id, str):
            raise ValueError("client_id required")
        action = doc.get("action")
        if action not in ACTION_VOCABULARY:
            raise UnknownActionError(f"unknown action: {action}")
        category = doc.get("category")
        if category is not None and category not in _VALID_CATEGORIES:
            raise ValueError(f"unknown category: {category}")
        target = doc.get("target_category")
        if target is not None and target not in _VALID_CATEGORIES:
            raise ValueError(f"unknown target_category: {target}")
        if doc.get("has_links") is not None and not isinstance(doc["has_links"], bool):
            raise ValueError("has_links must be a boolean")
        return cls(
            timestamp=parse_timestamp(doc["timestamp"]),
            client_id=client_id,
            action=action,
            category=category,
            record_id=doc.get("record_id"),
            query=doc.get("query"),
            has_links=doc.get("has_links"),
            target_category=target,
        )


def parse_events(lines: Iterable[str]) -> tuple[list[UsageEvent], int]:
    """Parse an event-log stream; bad lines are counted, never fatal."""
    events: list[UsageEvent] = []
    rejected = 0
    for line in lines:
        line = line.strip()
        if not line:
            continue
        try:
            doc = json.loads(line)
            if not isinstance(doc, dict):
                raise ValueError("event must be an object")
            events.append(UsageEvent.from_json(doc))
        except (ValueError, KeyError, TypeError):
            rejected += 1
    events.sort(key=lambda e: (e.client_id, e.timestamp))
    return events, rejected


@dataclass
class Session:
    client_id: str
    events: list[UsageEvent]

    @property
    def start(self) -> datetime:
        return self.events[0].timestamp

    @property
    def end(self) -> datetime:
        return self.events[-1].timestamp

    @property
    def duration_seconds(self) -> float:
        return (self.end - self.start).total_seconds()


def sessionize(
    events: list[UsageEvent], timeout: timedelta = DEFAULT_SESSION_TIMEOUT
) -> list[Session]:
    """Split each client's event stream at inactivity gaps of ``timeout`` or more."""
    sessions: list[Session] = []
    current: list[UsageEvent] = []
    for event in events:
        if current and (
            event.client_id != current[-1].client_id
            or event.timestamp - current[-1].timestamp >= timeout
        ):
            sessions.append(Session(current[0].client_id, current))
            current = []
        current.append(event)
    if current:
        sessions.append(Session(current[0].client_id, current))
    return sessions


def classify_path_action(action: str) -> str:
    if classify_signal(action) is not None:
        return "positive"
    if action == "search":
        return "search"
    if action in ("view_record", "view_record_links"):
        return "view_record"
    return "other"


@dataclass
class PathAggregate:
    step_counts: list[dict[str, int]] = field(default_factory=list)
    transitions: dict[tuple[int, str, str], int] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {
            "step_counts": self.step_counts,
            "transitions": [
                {"step": step, "from": src, "to": dst, "count": count}
                for (step, src, dst), count in sorted(self.transitions.items())
            ],
        }


def aggregate_paths(sessions: list[Session], k: int = 8) -> PathAggregate:
    """Per-step class counts and step transitions over the first ``k`` actions."""
    if k < 1:
        raise ValueError("path depth must be >= 1")
    agg = PathAggregate()
    for session in sessions:
        classes = [classify_path_action(e.action) for e in session.events[:k]]
        for step, cls in enumerate(classes):
            while len(agg.step_counts) <= step:
                agg.step_counts.append({})
            agg.step_counts[step][cls] = agg.step_counts[step].get(cls, 0) + 1
        for step in range(len(classes) - 1):
            key = (step + 1, classes[step], classes[step + 1])
            agg.transitions[key] = agg.transitions.get(key, 0) + 1
    return agg


def _share(counts: Counter) -> dict[str, float]:
    total = sum(counts.values())
    if total == 0:
        return {}
    return {key: counts[key] / total for key in sorted(counts)}


def _mean(values: list[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def _sd(values: list[float]) -> float:
    return statistics.pstdev(values) if values else 0.0


@dataclass
class UsageReport:
    session_count: int = 0
    event_count: int = 0
    mean_session_duration_seconds: float = 0.0
    mean_actions_per_session: float = 0.0
    search_share_by_category: dict[str, float] = field(default_factory=dict)
    category_change_targets: dict[str, float] = field(default_factory=dict)
    category_change_session_rate: float = 0.0
    first_action_split: dict[str, float] = field(default_factory=dict)
    first_search_category_share: dict[str, float] = field(default_factory=dict)
    first_view_record_category_share: dict[str, float] = field(default_factory=dict)
    positive_session_rate: float = 0.0
    positive_signal_count: int = 0
    mean_signals_per_positive_session: float = 0.0
    sd_signals_per_positive_session: float = 0.0
    mean_signals_per_session: float = 0.0
    sd_signals_per_session: float = 0.0
    signal_shares: dict[str, float] = field(default_factory=dict)
    signal_group_shares: dict[str, float] = field(default_factory=dict)
    link_section_open_rate: float = 0.0
    link_direction_matrix: dict[str, dict[str, int]] = field(default_factory=dict)
    paths: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {
            "session_count": self.session_count,
            "event_count": self.event_count,
            "mean_session_duration_seconds": self.mean_session_duration_seconds,
            "mean_actions_per_session": self.mean_actions_per_session,
            "search_share_by_category": self.search_share_by_category,
            "category_change_targets": self.category_change_targets,
            "category_change_session_rate": self.category_change_session_rate,
            "first_action_split": self.first_action_split,
            "first_search_category_share": self.first_search_category_share,
            "first_view_record_category_share": self.first_view_record_category_share,
            "positive_session_rate": self.positive_session_rate,
            "positive_signal_count": self.positive_signal_count,
            "mean_signals_per_positive_session": self.mean_signals_per_positive_session,
            "sd_signals_per_positive_session": self.sd_signals_per_positive_session,
            "mean_signals_per_session": self.mean_signals_per_session,
            "sd_signals_per_session": self.sd_signals_per_session,
            "signal_shares": self.signal_shares,
            "signal_group_shares": self.signal_group_shares,
            "link_section_open_rate": self.link_section_open_rate,
            "link_direction_matrix": self.link_direction_matrix,
            "paths": self.paths,
        }


def compute_report(sessions: list[Session], path_depth: int = 8) -> UsageReport:
    """All report metrics in one pass over the session list.

    Rates with an empty denominator come out as 0.0 rather than failing,
    so an empty log yields an all-zero report.
    """
    report = UsageReport(paths=aggregate_paths(sessions, path_depth).to_json())
    report.session_count = len(sessions)
    report.event_count = sum(len(s.events) for s in sessions)
    if not sessions:
        report.first_action_split = {}
        return report

    report.mean_session_duration_seconds = _mean([s.duration_seconds for s in sessions])
    report.mean_actions_per_session = report.event_count / len(sessions)

    search_categories: Counter[str] = Counter()
    change_targets: Counter[str] = Counter()
    sessions_with_change = 0
    first_classes: Counter[str] = Counter()
    first_search_categories: Counter[str] = Counter()
    first_view_categories: Counter[str] = Counter()
    signal_actions: Counter[str] = Counter()
    signal_groups: Counter[str] = Counter()
    signals_per_session: list[float] = []
    sessions_with_links_shown = 0
    sessions_with_link_view = 0
    direction: dict[str, dict[str, int]] = {}

    for session in sessions:
        previous_search_category: str | None = None
        changed = False
        signals_here = 0
        links_shown = False
        link_view = False
        for event in session.events:
            group = classify_signal(event.action)
            if group is not None:
                signals_here += 1
                signal_actions[event.action] += 1
                signal_groups[group] += 1
                if group == "view_linked_resources":
                    link_view = True
            if event.has_links is True:
                links_shown = True
            if event.action == "search":
                category = event.category or ALL_CATEGORIES
                search_categories[category] += 1
                if previous_search_category is not None and category != previous_search_category:
                    change_targets[category] += 1
                    changed = True
                previous_search_category = category
            if event.action == "click_on_linked_resource":
                source = event.category
                target = event.target_category
                if source and target:
                    direction.setdefault(source, {})
                    direction[source][target] = direction[source].get(target, 0) + 1

        first = session.events[0]
        if first.action == "search":
            first_classes["search"] += 1
            first_search_categories[first.category or ALL_CATEGORIES] += 1
        elif first.action in ("view_record", "view_record_links"):
            first_classes["view_record"] += 1
            first_view_categories[first.category or ALL_CATEGORIES] += 1
        else:
            first_classes["other"] += 1

        signals_per_session.append(signals_here)
        if changed:
            sessions_with_change += 1
        if links_shown:
            sessions_with_links_shown += 1
        if link_view:
            sessions_with_link_view += 1

    n = len(sessions)
    positive = [s for s in signals_per_session if s > 0]

    report.search_share_by_category = _share(search_categories)
    report.category_change_targets = _share(change_targets)
    report.category_change_session_rate = sessions_with_change / n
    report.first_action_split = {
        cls: first_classes.get(cls, 0) / n for cls in ("search", "view_record", "other")
    }
    report.first_search_category_share = _share(first_search_categories)
    report.first_view_record_category_share = _share(first_view_categories)
    report.positive_session_rate = len(positive) / n
    report.positive_signal_count = int(sum(signals_per_session))
    report.mean_signals_per_positive_session = _mean(positive)
    report.sd_signals_per_positive_session = _sd(positive)
    report.mean_signals_per_session = _mean(signals_per_session)
    report.sd_signals_per_session = _sd(signals_per_session)
    report.signal_shares = _share(signal_actions)
    report.signal_group_shares = _share(signal_groups)
    report.link_section_open_rate = (
        sessions_with_link_view / sessions_with_links_shown if sessions_with_links_shown else 0.0
    )
    report.link_direction_matrix = {
        source: dict(sorted(targets.items())) for source, targets in sorted(direction.items())
    }
    return report
