import os
from dotenv import load_dotenv
from joblib import cpu_count

load_dotenv()

# Defaults to physical cores, not hyper-threads
WEMIX_THREADS = int(os.getenv("WEMIX_THREADS", cpu_count(only_physical_cores=True)))
WEMIX_LOG_LEVEL = os.getenv("WEMIX_LOG_LEVEL", "INFO")
WEMIX_ROOT_MC_DRAWS = int(os.getenv("WEMIX_ROOT_MC_DRAWS", 10000))
