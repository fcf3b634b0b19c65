"""
SQLite + SQLAlchemy журнал запусков.
Каждая команда CLI (augment / audit / simulate / catalog / bench) может
оставить одну запись: что запускали, над какой системой и с каким итогом.
"""

import os
from datetime import datetime

from dotenv import load_dotenv
from sqlalchemy import Boolean, Column, DateTime, Float, Integer, String, create_engine, func
from sqlalchemy.engine import make_url
from sqlalchemy.orm import declarative_base, scoped_session, sessionmaker

load_dotenv()
DB_URL = os.getenv("DB_URL", "sqlite:///privcon_runs.db")

engine = create_engine(DB_URL, future=True)
Session = scoped_session(sessionmaker(bind=engine, expire_on_commit=False))
Base = declarative_base()


# ----------------------- модель ----------------------- #
class Run(Base):  # type: ignore[misc, valid-type]
    __tablename__ = "runs"
    id = Column(Integer, primary_key=True)
    command = Column(String, nullable=False)  # augment / audit / simulate / catalog / bench
    kind = Column(String, nullable=True)  # raw / alg1 / alg2 / p1d
    n_original = Column(Integer, nullable=True)
    dim = Column(Integer, nullable=True)
    seed = Column(Integer, nullable=True)
    verdict = Column(String, nullable=True)  # private / not-private
    consensus_value = Column(Float, nullable=True)
    rounds = Column(Integer, nullable=True)
    converged = Column(Boolean, nullable=True)
    created_at = Column(DateTime, nullable=False, default=datetime.utcnow)

    def __repr__(self) -> str:
        return f"<Run #{self.id} {self.command} kind={self.kind} N={self.n_original} verdict={self.verdict}>"


# ------------------ служебные функции ----------------- #


def init_db():
    url = make_url(DB_URL)
    if url.drivername.startswith("sqlite") and url.database and url.database != ":memory:":
        directory = os.path.dirname(os.path.abspath(url.database))
        if directory:
            os.makedirs(directory, exist_ok=True)
    Base.metadata.create_all(engine)


def store_run(**kwargs):
    """Сохраняет один запуск и возвращает объект Run."""
    with Session() as s:
        r = Run(**kwargs)
        s.add(r)
        s.commit()
        s.refresh(r)
        return r


def last_runs(n: int = 20):
    """Последние n запусков, новые первыми."""
    with Session() as s:
        return s.query(Run).order_by(Run.id.desc()).limit(n).all()


def stats():
    """Сводка по журналу."""
    with Session() as s:
        total = s.query(func.count(Run.id)).scalar()
        private = s.query(func.count(Run.id)).filter(Run.verdict == "private").scalar()
        exposed = s.query(func.count(Run.id)).filter(Run.verdict == "not-private").scalar()
        converged = s.query(func.count(Run.id)).filter(Run.converged.is_(True)).scalar()
    return {"runs": total, "private": private, "not_private": exposed, "converged": converged}
