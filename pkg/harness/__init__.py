import os

import util.log

LOG_FILE_VARIABLE = 'ROBUST_MOM_LOG_FILE'

# initialize named global logger
logger = util.log.configure_logger('robust-mom_logger', os.environ.get(LOG_FILE_VARIABLE))
