import numpy as np
import pytest

from estimand_lab.potential_outcomes import PotentialParticipant, PotentialTable


def make_participant(
    id=1,
    c=(0.0,),
    r=1,
    x_under=(0, 1),
    y1_under=(3.0, 4.0),
    y2_under=(3.0, 5.0),
    y1_free=None,
    y2_free=None,
    m_under=(0, 0),
    death_under=(0, 0),
    t_under=(1, 1),
    w_under=(0, 0),
    dev_under=(0, 0),
    any_dose=True,
    post_rand_data=True,
    s=1,
):
    """Hand-table participant with sensible defaults (no intercurrent events)."""
    return PotentialParticipant(
        id=id,
        c=np.asarray(c, dtype=float),
        s=s,
        r=r,
        x_under=x_under,
        y1_under=y1_under,
        y2_under=y2_under,
        y1_free=y1_under if y1_free is None else y1_free,
        y2_free=y2_under if y2_free is None else y2_free,
        m_under=m_under,
        death_under=death_under,
        t_under=t_under,
        w_under=w_under,
        dev_under=dev_under,
        any_dose=any_dose,
        post_rand_data=post_rand_data,
    )


def table_of(*participants):
    return PotentialTable.from_participants(list(participants))


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
