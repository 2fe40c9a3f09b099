"""
SPIKE Experiment Suite

Runs the built-in presets through the spike component CLI in stages:
1. Zigzag - reduced two-kernel lambda sweep
2. Scalar - Burgers and Buckley-Leverett runs against the FV reference
3. Euler - long Euler run with knot redistribution

Each stage can be skipped; every preset writes into its own directory under
the suite's runs directory.
"""
import functools
import os
import subprocess
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, TypeVar

import click
from dotenv import load_dotenv
from omegaconf import OmegaConf

load_dotenv()
T = TypeVar('T')
PYTHON_EXECUTABLE = sys.executable
STAGES = ["zigzag", "scalar", "euler"]


def change_directory(directory: str) -> Callable[[Callable[..., T]], Callable[..., T]]:
    """
    Decorator that changes the working directory before executing a function and
    restores the original directory afterward.

    Args:
        directory: The directory to change to before executing the function
    """
    def decorator(func: Callable[..., T]) -> Callable[..., T]:
        @functools.wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> T:
            if not os.path.exists(directory):
                raise FileNotFoundError(f"Directory does not exist: {directory}")

            original_dir = os.getcwd()
            try:
                os.chdir(directory)
                return func(*args, **kwargs)
            finally:
                os.chdir(original_dir)
        return wrapper
    return decorator


def run_subprocess(command: List[str], description: str, verbose: bool = False) -> subprocess.CompletedProcess:
    """
    Run a subprocess, echoing its output when it fails or when verbose.

    Raises:
        subprocess.CalledProcessError: If the subprocess returns a non-zero exit code
    """
    print(f"Running {description}")
    try:
        result = subprocess.run(command, check=True, capture_output=True, text=True)
        print(f"Successfully completed: {description}")
        if verbose:
            print(f"Command: {' '.join(command)}")
            print(f"Output:\n{result.stdout}")
            print(f"stderr (logs):\n{result.stderr}")
        return result
    except subprocess.CalledProcessError as e:
        print(f"ERROR in {description}:")
        print(f"Exit code: {e.returncode}")
        print(f"Standard output: {e.stdout}")
        print(f"Standard error: {e.stderr}")
        raise


@change_directory("spike")
def run_stage(stage: str, config: Dict[str, Any], verbose: bool) -> List[str]:
    """
    Run every preset of a stage through ``spike/main.py run``.

    Returns:
        Output directories of the runs
    """
    stage_config = config["stages"][stage]
    outputs = []
    for preset in stage_config["presets"]:
        out = str(Path(config["runs_dir"]) / preset)
        Path(out).mkdir(parents=True, exist_ok=True)
        command = [PYTHON_EXECUTABLE, "main.py", "--quiet", "run", "--preset", preset, "--out", out]
        command += [str(arg) for arg in stage_config.get("extra_args", [])]
        run_subprocess(command, f"{stage} stage: {preset} -> {out}", verbose)
        outputs.append(out)
    return outputs


@click.command()
@click.option("--config", default="suite_config.yaml", help="Suite configuration file")
@click.option("--skip-zigzag", is_flag=True, help="Skip the reduced zigzag sweep")
@click.option("--skip-scalar", is_flag=True, help="Skip the Burgers and Buckley-Leverett runs")
@click.option("--skip-euler", is_flag=True, help="Skip the Euler run")
@click.option("--verbose", is_flag=True, help="Echo the output of every run")
def main(config: str, skip_zigzag: bool, skip_scalar: bool, skip_euler: bool, verbose: bool) -> None:
    """Run the SPIKE experiment suite from the zigzag sweep to the Euler long run."""
    config_data = OmegaConf.to_container(OmegaConf.load(config), resolve=True)
    config_data["runs_dir"] = os.path.abspath(config_data["runs_dir"])
    skips = {"zigzag": skip_zigzag, "scalar": skip_scalar, "euler": skip_euler}

    for stage in STAGES:
        if skips[stage]:
            print(f"Skipping {stage} stage")
            continue
        run_stage(stage, config_data, verbose)

    print(f"Suite completed successfully! Results in {config_data['runs_dir']}")


if __name__ == "__main__":
    main()
