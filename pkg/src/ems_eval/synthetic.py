"""Synthetic earnings-call style answers for property tests and the fixture dataset.

Each fact comes in two wordings: a terse reference bullet and a looser
candidate paraphrase followed by a sentence of commentary.  The paraphrase
keeps every number, so lexical matching can find it until the numbers are
corrupted.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .core import EvalTriplet

COMPANIES = (
    "Northwind", "Contoso", "Fabrikam", "Tailspin", "Litware",
    "Adatum", "Proseware", "Woodgrove", "Lucerne", "Wingtip",
)

# (reference wording, candidate wording); fields filled from _values()
FACTS: tuple[tuple[str, str], ...] = (
    (
        "{co} reported total revenue of ${a} billion for the quarter, up {p}% year over year.",
        "Total quarterly revenue at {co} came in at ${a} billion, a gain of {p}% compared with the same "
        "period last year. Management credited steady demand from enterprise customers for the top-line result.",
    ),
    (
        "Operating margin expanded to {p}% as cost discipline offset higher wage expenses.",
        "The operating margin widened to {p}% during the period because cost discipline more than offset "
        "rising wage expenses. Leadership signalled that further efficiency programs remain under way.",
    ),
    (
        "Free cash flow reached ${a} billion, supported by stronger collections from customers.",
        "{co} generated free cash flow of ${a} billion, helped by stronger collections from customers. "
        "The finance team expects working capital to normalize over the coming quarters.",
    ),
    (
        "Capital expenditures rose to ${a} billion, mainly for new data center capacity.",
        "Spending on capital expenditures climbed to ${a} billion, driven mainly by additional data center "
        "capacity. Executives said the build-out supports long-term growth in compute demand.",
    ),
    (
        "The board authorized a new share repurchase program of ${a} billion.",
        "A fresh share repurchase program worth ${a} billion was authorized by the board. This signals "
        "confidence in the balance sheet and a commitment to returning capital.",
    ),
    (
        "The quarterly dividend was raised by {p}% to ${c} per share.",
        "Shareholders will receive a quarterly dividend that was raised {p}% to ${c} per share. "
        "The increase marks another year of consecutive dividend growth.",
    ),
    (
        "Headcount fell by {n} employees after the restructuring of the logistics division.",
        "Following the restructuring of its logistics division, {co} reduced headcount by {n} employees. "
        "Severance charges related to this step were recorded in the period.",
    ),
    (
        "Cloud segment sales grew {p}% to ${a} billion on strong AI infrastructure demand.",
        "Sales in the cloud segment increased {p}% to ${a} billion, reflecting strong demand for AI "
        "infrastructure. Customers continued to migrate workloads to the platform at a healthy pace.",
    ),
    (
        "Management guided next quarter revenue between ${a} billion and ${b} billion.",
        "For next quarter, management guided revenue to a range between ${a} billion and ${b} billion. "
        "The outlook assumes stable currency rates and no major macro shocks.",
    ),
    (
        "Inventory levels declined {p}% as supply chain constraints eased.",
        "As supply chain constraints eased, inventory levels declined by {p}% from the prior quarter. "
        "Lower inventory should reduce storage costs going forward.",
    ),
    (
        "Research and development spending increased to ${a} billion to accelerate the product roadmap.",
        "{co} increased research and development spending to ${a} billion in order to accelerate its "
        "product roadmap. Much of the investment targets new chips and software tools.",
    ),
    (
        "Total debt was reduced by ${a} billion, lowering the net leverage ratio to {r} times.",
        "The company paid down ${a} billion of total debt, which lowered its net leverage ratio to {r} times. "
        "Credit agencies have responded favorably to the deleveraging.",
    ),
    (
        "International revenue accounted for {p}% of total sales, with Europe the largest region.",
        "Roughly {p}% of total sales came from international revenue, and Europe remained the largest "
        "region. Currency headwinds trimmed reported growth in these markets.",
    ),
    (
        "Gross margin came in at {p}%, {q} basis points better than the prior year.",
        "The gross margin landed at {p}%, an improvement of {q} basis points over the prior year. "
        "A richer product mix was the main driver of this improvement.",
    ),
)


@dataclass(frozen=True)
class SyntheticAnswer:
    company: str
    reference_points: tuple[str, ...]
    candidate_points: tuple[str, ...]

    @property
    def reference_text(self) -> str:
        return "\n".join(f"- {p}" for p in self.reference_points)

    @property
    def candidate_text(self) -> str:
        return render_candidate(self.candidate_points, self.company)


def render_candidate(points: tuple[str, ...] | list[str], company: str) -> str:
    """Candidate prose: one paragraph per point plus a closing summary paragraph."""
    closing = f"In conclusion, {company} delivered a quarter that the market will study closely."
    return "\n\n".join([*points, closing])


def _values(rng: random.Random) -> dict[str, str]:
    a = rng.uniform(1.0, 95.0)
    return {
        "a": f"{a:.1f}",
        "b": f"{a + rng.uniform(0.5, 4.0):.1f}",
        "c": f"{rng.uniform(0.1, 3.0):.2f}",
        "p": str(rng.randint(2, 68)),
        "q": str(rng.randint(20, 480)),
        "n": f"{rng.randint(2, 90) * 100:,}",
        "r": f"{rng.uniform(0.5, 3.5):.1f}",
    }


def synthetic_answer(seed: int, n_facts: int = 8) -> SyntheticAnswer:
    if not 1 <= n_facts <= len(FACTS):
        raise ValueError(f"n_facts must be in [1, {len(FACTS)}]")
    rng = random.Random(seed)
    company = rng.choice(COMPANIES)
    refs, cands = [], []
    for idx in rng.sample(range(len(FACTS)), n_facts):
        ref, cand = FACTS[idx]
        values = {"co": company, **_values(rng)}
        refs.append(ref.format(**values))
        cands.append(cand.format(**values))
    return SyntheticAnswer(company, tuple(refs), tuple(cands))


def synthetic_triplet(seed: int, n_facts: int = 8, question_id: int = 1, question: str = "") -> EvalTriplet:
    ans = synthetic_answer(seed, n_facts)
    return EvalTriplet(
        id=f"syn-{seed:04d}",
        company=ans.company,
        question_id=question_id,
        question=question or "What were the key financial results discussed on the call?",
        reference=ans.reference_text,
        candidate=ans.candidate_text,
    )


def fixture_records(count: int = 6, seed: int = 0) -> list[dict]:
    """Records for a small jsonl fixture dataset."""
    rows = []
    for i in range(count):
        t = synthetic_triplet(seed + i, n_facts=4 + i % 4, question_id=1 + i % 5)
        rows.append({
            "id": t.id, "company": t.company, "question_id": t.question_id,
            "question": t.question, "reference": t.reference, "candidate": t.candidate,
        })
    return rows


def fixture_jsonl(count: int = 6, seed: int = 0) -> str:
    return "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in fixture_records(count, seed))
