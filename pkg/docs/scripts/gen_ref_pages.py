# See the NOTICE file distributed with this work for additional information
# regarding copyright ownership.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Generates the code reference pages of the ``flashcosmos`` package for mkdocs."""

from pathlib import Path

import mkdocs_gen_files


SOURCES = Path("src", "python")
PACKAGE = "flashcosmos"

nav = mkdocs_gen_files.Nav()

for py_path in sorted(SOURCES.joinpath(PACKAGE).rglob("*.py")):
    module_path = py_path.relative_to(SOURCES)
    parts = module_path.with_suffix("").parts
    if parts[-1].startswith("_") and parts[-1] != "__init__":
        continue
    if parts[-1] == "__init__":
        parts = parts[:-1]
        doc_path = module_path.parent / "index.md"
    else:
        doc_path = module_path.with_suffix(".md")
    nav[parts] = doc_path.as_posix()
    with mkdocs_gen_files.open(Path("reference", doc_path), "w") as handle:
        handle.write(f"# `{'.'.join(parts)}`\n\n::: {'.'.join(parts)}\n")
    mkdocs_gen_files.set_edit_path(Path("reference", doc_path), py_path)

with mkdocs_gen_files.open("reference/summary.md", "w") as nav_file:
    nav_file.writelines(nav.build_literate_nav())
