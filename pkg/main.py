from aom_dpd import create_app
from aom_dpd.config import config
import os

# Get config name from environment
config_name = os.environ.get('AOM_DPD_ENV', 'development')

# Create app
app = create_app(config[config_name])

if __name__ == '__main__':
    app(prog_name='aom-dpd')
