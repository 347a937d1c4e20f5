# coding: utf-8

# # Blocking and blinded export
#
# The same run as the previous demo, now through the command line: ingest into
# a case, apply the filter, then look at what a reviewer and a magistrate see.

# In[1]:

import tempfile
from pathlib import Path

from privfilter.case import load_case, search
from privfilter.cli import main
from privfilter.export import read_manifest, verify_manifest

work = Path(tempfile.mkdtemp())
main(["gen-corpus", "--out", str(work / "gen"), "--seed", "0"])
main(["ingest", "--root", str(work / "gen" / "evidence"), "--case", str(work / "case")])


# In[2]:

main(["filter", "--case", str(work / "case"), "--seed-address", "lawyer@domain.ext",
      "--apply", "--export-dir", str(work / "export")])


# The console shows counts, kinds and blinded file names only. The export
# directory holds one PDF per unique item and the file list that ties each
# PDF back to its evidence.

# In[3]:

manifest = read_manifest(work / "export" / "privileged_file_list.tsv")
for row in manifest.rows[:4]:
    print(row.export_filename, row.export_status.value, row.original_path)


# In[4]:

case = load_case(work / "case")
verify_manifest(manifest, case.corpus)


# An empty list: every row maps to one item whose evidence bytes still hash to
# the recorded MD5.
#
# ## Exclusion
#
# Flagged items are hidden from searches. Looking at them anyway is possible
# but leaves a trace in the audit log.

# In[5]:

md5 = manifest.rows[0].original_md5
print(search(case, md5=md5))
print(len(search(case, md5=md5, include_excluded=True)))
case.audit_log[-1].action
