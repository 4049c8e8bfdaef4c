import asyncio
import json
import logging
import os
from dataclasses import asdict
from pathlib import Path
from typing import List, Optional

import aiofiles
from tqdm import tqdm

from config import Config
from errors import InvalidInputError
from profile_file import ProfileFile
from trial_log import TrialLog, scenario_from_path
from trial_result import TrialResult
from user_model import UserModelParams
from walker_sim import CONTROLLERS, Scenario, run_trial


class TrialRunner:
    def __init__(self, config: Config, output_dir: Optional[Path] = None):
        self.config = config
        self.base_dir = Path(output_dir or config.OUTPUT_DIR)
        self.results_file = self.base_dir / "runs.json"
        self.setup_directories()

    def setup_directories(self) -> None:
        self.base_dir.mkdir(parents=True, exist_ok=True)

    def trial_path(self, scenario: Scenario, controller: str, seed: int, k: int) -> Path:
        return self.base_dir / f"{scenario.name}_{controller}_{seed}_{k}.csv"

    async def run_trials(self, scenario: Scenario, controller: str, profile: ProfileFile,
                         seed: int = 0, trials: int = 5,
                         user: Optional[UserModelParams] = None) -> List[TrialResult]:
        """Run trials concurrently; trial k is seeded with seed + k."""
        semaphore = asyncio.Semaphore(self.config.NUM_WORKERS)
        user = user or profile.user
        with tqdm(total=trials, desc=f"{scenario.name}/{controller}", unit="trial") as progress:
            async def one(k: int) -> TrialResult:
                async with semaphore:
                    result = await self.run_one(scenario, controller, profile, seed, k, user)
                progress.update(1)
                return result

            results = await asyncio.gather(*[one(k) for k in range(trials)])

        await self.save_results(results)
        failed = sum(not r.success for r in results)
        incomplete = sum(r.success and not r.complete for r in results)
        logging.info(f"Finished {trials} {controller} trials of {scenario.name}: "
                     f"{failed} failed, {incomplete} timed out")
        return list(results)

    async def run_one(self, scenario: Scenario, controller: str, profile: ProfileFile,
                      seed: int, k: int, user: UserModelParams) -> TrialResult:
        trial_seed = seed + k
        path = self.trial_path(scenario, controller, seed, k)
        name = path.stem
        try:
            logging.info(f"Running trial {name}")
            log = await asyncio.to_thread(
                run_trial, scenario, controller, trial_seed, profile.fuzzy, user,
                profile.linear, profile.angular, self.config.SAMPLE_RATE_HZ, self.config.TRIAL_TIMEOUT_S)
            await self.write_log(log, path)
            return TrialResult(name, scenario.name, controller, trial_seed, success=True,
                               complete=log.complete, ticks=len(log), saturated_ticks=log.saturated_ticks,
                               csv_path=str(path))
        except Exception as e:
            error_msg = str(e)
            logging.error(f"Error running trial {name}: {error_msg}")
            return TrialResult(name, scenario.name, controller, trial_seed, success=False,
                               error_message=error_msg)

    async def write_log(self, log: TrialLog, path: Path) -> None:
        """Write to a temporary name first so no partial CSV is left behind."""
        tmp = path.with_name(f".{path.name}.tmp")
        try:
            async with aiofiles.open(tmp, "w", newline="") as f:
                await f.write(log.to_csv())
            os.replace(tmp, path)
        except Exception:
            if tmp.exists():
                tmp.unlink()
            raise

    async def load_results(self) -> List[dict]:
        try:
            if self.results_file.exists():
                async with aiofiles.open(self.results_file, "r") as f:
                    return json.loads(await f.read())
            return []
        except Exception as e:
            logging.error(f"Error loading previous results: {e}")
            return []

    async def save_results(self, results: List[TrialResult]) -> None:
        """Merge into runs.json, keyed by trial name so reruns replace their entries."""
        try:
            merged = {entry["name"]: entry for entry in await self.load_results()}
            merged.update({r.name: asdict(r) for r in results})
            async with aiofiles.open(self.results_file, "w") as f:
                await f.write(json.dumps([merged[name] for name in sorted(merged)], indent=2))
        except Exception as e:
            logging.error(f"Error saving results: {e}")


async def load_runs(run_dir: Path) -> List[TrialLog]:
    """Read every trial CSV in a directory, in file-name order.

    Completeness comes from runs.json; logs it does not list are taken as complete.
    """
    complete = {}
    results_file = Path(run_dir) / "runs.json"
    if results_file.exists():
        async with aiofiles.open(results_file, "r") as f:
            try:
                complete = {entry["name"]: entry.get("complete", True) for entry in json.loads(await f.read())}
            except (ValueError, KeyError, TypeError) as e:
                raise InvalidInputError(f"{results_file}: {e}") from e
    logs = []
    for path in sorted(Path(run_dir).glob("*.csv")):
        parts = path.stem.rsplit("_", 3)
        if len(parts) != 4 or parts[1] not in CONTROLLERS:
            logging.debug(f"Ignoring {path.name}: not a trial log")
            continue
        async with aiofiles.open(path, "r") as f:
            text = await f.read()
        try:
            log = TrialLog.from_csv(text, scenario_from_path(path), complete.get(path.stem, True))
        except InvalidInputError as e:
            raise InvalidInputError(f"{path.name}: {e}") from e
        if not log.complete:
            logging.warning(f"{path.name} timed out before finishing the course")
        logs.append(log)
    return logs
