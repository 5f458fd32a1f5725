"""
File utilities for graphs, config files, corpora and result outputs
"""
import os
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Iterator, List, TextIO
from dotenv import dotenv_values
from core.errors import DysonError
from core.graph import Graph
from utils.logger import logger

PARTIAL_SUFFIX = '.partial'


class FileUtils:
    """Utilities for file operations"""

    @staticmethod
    def read_text(file_path: Path) -> str:
        """Read a UTF-8 text file, logging the failure before re-raising"""
        try:
            with open(file_path, 'r', encoding='utf-8') as f:
                return f.read()
        except OSError as e:
            logger.error(f"Error reading file {file_path}: {e}")
            raise

    @staticmethod
    def read_graph(file_path: Path) -> Graph:
        text = FileUtils.read_text(Path(file_path))
        try:
            return Graph.from_text(text)
        except DysonError as e:
            logger.error(f"Malformed graph file {file_path}: {e}")
            raise

    @staticmethod
    def write_graph(file_path: Path, g: Graph) -> None:
        with FileUtils.atomic_output(Path(file_path)) as f:
            f.write(g.to_text())
        logger.info(f"Wrote graph with {g.num_edges} edges to {file_path}")

    @staticmethod
    def read_config(file_path: Path) -> Dict[str, str]:
        """Flat key=value file; blank values and comments are dropped"""
        path = Path(file_path)
        if not path.is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        values = dotenv_values(path)
        return {key.strip().lower().replace('-', '_'): value for key, value in values.items() if value}

    @staticmethod
    def read_corpus_lines(file_path: Path) -> List[str]:
        """Non-empty, non-comment lines of a corpus file"""
        lines = FileUtils.read_text(Path(file_path)).splitlines()
        return [line.strip() for line in lines if line.strip() and not line.lstrip().startswith('#')]

    @staticmethod
    def partial_path(file_path: Path) -> Path:
        return file_path.with_name(file_path.name + PARTIAL_SUFFIX)

    @staticmethod
    def remove_partial(file_path: Path) -> None:
        partial = FileUtils.partial_path(Path(file_path))
        if partial.exists():
            partial.unlink()
            logger.info(f"Removed partial output {partial}")

    @staticmethod
    @contextmanager
    def atomic_output(file_path: Path) -> Iterator[TextIO]:
        """Write to `<name>.partial` and rename on success; the partial file is removed on failure"""
        file_path = Path(file_path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        partial = FileUtils.partial_path(file_path)
        try:
            with open(partial, 'w', encoding='utf-8', newline='') as f:
                yield f
            os.replace(partial, file_path)
        except BaseException:
            FileUtils.remove_partial(file_path)
            raise
